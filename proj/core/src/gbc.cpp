#include "riskmap/gbc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "riskmap/errors.hpp"

namespace riskmap {

double RegressionTree::predict(std::span<const double> x) const {
  int idx = 0;
  while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(idx)];
    idx = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(idx)].leaf_value;
}

std::string to_string(ModelMode mode) {
  return mode == ModelMode::Refined ? "Refined" : "Baseline";
}

ModelMode model_mode_from_string(const std::string& s) {
  if (s == "Refined") return ModelMode::Refined;
  if (s == "Baseline") return ModelMode::Baseline;
  throw ConfigInvalid("unknown model mode: " + s);
}

std::vector<FeatureMapSpec> specs_for_groups(const std::set<SpecGroup>& groups) {
  if (groups.empty()) {
    throw ConfigInvalid("specs_for_groups: empty group selection");
  }
  std::vector<FeatureMapSpec> out;
  for (const auto& spec : builtin_specs()) {
    if (groups.count(spec.group)) out.push_back(spec);
  }
  return out;
}

FeatureVector vectorize(const std::string& driver_id,
                        const std::map<std::string, std::vector<double>>& maps_by_spec,
                        std::span<const FeatureMapSpec> selected_specs) {
  if (selected_specs.empty()) {
    throw ConfigInvalid("vectorize: no specs selected");
  }
  std::size_t present = 0;
  FeatureVector fv;
  fv.driver_id = driver_id;
  fv.mask.reserve(selected_specs.size());
  for (const auto& spec : selected_specs) {
    const std::size_t cells =
        static_cast<std::size_t>(spec.y_bins) * static_cast<std::size_t>(spec.x_bins);
    const auto it = maps_by_spec.find(spec.id);
    if (it == maps_by_spec.end()) {
      fv.values.insert(fv.values.end(), cells, 0.0);
      fv.mask.push_back(0.0);
      continue;
    }
    if (it->second.size() != cells) {
      throw DimensionMismatch("vectorize: map for " + spec.id + " has wrong shape");
    }
    fv.values.insert(fv.values.end(), it->second.begin(), it->second.end());
    fv.mask.push_back(1.0);
    ++present;
  }
  if (present < (selected_specs.size() + 1) / 2) {
    throw TooSparse("vectorize: driver " + driver_id + " has maps for " +
                    std::to_string(present) + " of " +
                    std::to_string(selected_specs.size()) + " specs");
  }
  return fv;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;  // column-major: x[feature][sample]
  const std::vector<std::vector<int>>& order;  // presorted sample ids per feature
  const std::vector<double>& grad;             // residuals y - p
  const std::vector<double>& hess;             // p (1 - p)
  int max_depth;

  std::vector<char> in_node;  // scratch membership flags
  RegressionTree tree;

  int build(const std::vector<int>& samples, int depth) {
    double sum_g = 0.0, sum_h = 0.0;
    for (const int i : samples) {
      sum_g += grad[static_cast<std::size_t>(i)];
      sum_h += hess[static_cast<std::size_t>(i)];
    }
    const auto n = static_cast<double>(samples.size());

    const auto make_leaf = [&] {
      TreeNode leaf;
      leaf.leaf_value = sum_g / (sum_h + 1e-12);  // one Newton step
      tree.nodes.push_back(leaf);
      return static_cast<int>(tree.nodes.size()) - 1;
    };

    if (depth >= max_depth || samples.size() < 2) return make_leaf();

    // Best least-squares split on the residuals: maximize
    // SL^2/nL + SR^2/nR - S^2/n over features (index order) and thresholds
    // (ascending); first strictly better candidate wins.
    const double base_score = sum_g * sum_g / n;
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    for (const int i : samples) in_node[static_cast<std::size_t>(i)] = 1;
    for (std::size_t f = 0; f < x.size(); ++f) {
      double left_sum = 0.0;
      std::size_t left_n = 0;
      double prev_value = 0.0;
      bool have_prev = false;
      for (const int i : order[f]) {
        if (!in_node[static_cast<std::size_t>(i)]) continue;
        const double v = x[f][static_cast<std::size_t>(i)];
        if (have_prev && v > prev_value && left_n > 0 && left_n < samples.size()) {
          const double right_sum = sum_g - left_sum;
          const auto ln = static_cast<double>(left_n);
          const double gain = left_sum * left_sum / ln +
                              right_sum * right_sum / (n - ln) - base_score;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_threshold = (prev_value + v) / 2.0;
          }
        }
        left_sum += grad[static_cast<std::size_t>(i)];
        ++left_n;
        prev_value = v;
        have_prev = true;
      }
    }
    for (const int i : samples) in_node[static_cast<std::size_t>(i)] = 0;

    if (best_feature < 0) return make_leaf();

    std::vector<int> left_samples, right_samples;
    for (const int i : samples) {
      if (x[static_cast<std::size_t>(best_feature)][static_cast<std::size_t>(i)] <
          best_threshold) {
        left_samples.push_back(i);
      } else {
        right_samples.push_back(i);
      }
    }

    const int node_idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(node_idx)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(node_idx)].threshold = best_threshold;
    const int left_idx = build(left_samples, depth + 1);
    const int right_idx = build(right_samples, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_idx)].left = left_idx;
    tree.nodes[static_cast<std::size_t>(node_idx)].right = right_idx;
    return node_idx;
  }
};

// One row's model input: values with the presence mask appended.
std::vector<double> augmented_row(const FeatureVector& fv) {
  std::vector<double> row = fv.values;
  row.insert(row.end(), fv.mask.begin(), fv.mask.end());
  return row;
}

}  // namespace

RiskModel train_gbc(const std::vector<FeatureVector>& features,
                    const std::vector<int>& labels, const GbcParams& params,
                    ModelMode mode, const std::vector<SpecGroup>& groups,
                    const ModelLayout& layout) {
  if (features.size() != labels.size()) {
    throw DimensionMismatch("train_gbc: features/labels size mismatch");
  }
  if (features.empty()) {
    throw EmptyInput("train_gbc: no training examples");
  }
  if (!(params.learning_rate > 0.0) || params.num_estimators < 1 ||
      params.max_depth < 1 || !(params.subsample > 0.0) || params.subsample > 1.0) {
    throw ConfigInvalid("train_gbc: invalid hyperparameters");
  }

  const std::size_t n = features.size();
  std::size_t pos = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw ConfigInvalid("train_gbc: labels must be 0/1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos < 2 || n - pos < 2) {
    throw DegenerateLabels("train_gbc: need at least 2 examples of each class");
  }

  const std::size_t expected_values = layout.values_length();
  const std::size_t expected_mask = layout.spec_ids.size();
  for (const auto& fv : features) {
    if (fv.values.size() != expected_values || fv.mask.size() != expected_mask) {
      throw DimensionMismatch("train_gbc: feature vector for " + fv.driver_id +
                              " does not match the layout");
    }
  }

  const std::size_t dim = expected_values + expected_mask;
  // column-major design matrix
  std::vector<std::vector<double>> x(dim, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = augmented_row(features[i]);
    for (std::size_t f = 0; f < dim; ++f) x[f][i] = row[f];
  }

  std::vector<std::vector<int>> order(dim, std::vector<int>(n));
  for (std::size_t f = 0; f < dim; ++f) {
    std::iota(order[f].begin(), order[f].end(), 0);
    std::stable_sort(order[f].begin(), order[f].end(), [&](int a, int b) {
      return x[f][static_cast<std::size_t>(a)] < x[f][static_cast<std::size_t>(b)];
    });
  }

  RiskModel model;
  model.mode = mode;
  model.groups = groups;
  model.params = params;
  model.layout = layout;

  const double prior = static_cast<double>(pos) / static_cast<double>(n);
  model.initial_score = std::log(prior / (1.0 - prior));

  std::vector<double> score(n, model.initial_score);
  std::vector<double> grad(n), hess(n);
  std::vector<int> all_samples(n);
  std::iota(all_samples.begin(), all_samples.end(), 0);

  std::mt19937_64 rng(params.seed);
  model.trees.reserve(static_cast<std::size_t>(params.num_estimators));
  for (int round = 0; round < params.num_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      grad[i] = static_cast<double>(labels[i]) - p;
      hess[i] = std::max(p * (1.0 - p), 1e-12);
    }

    std::vector<int> round_samples;
    if (params.subsample < 1.0) {
      std::vector<int> shuffled = all_samples;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto m = std::max<std::size_t>(
          2, static_cast<std::size_t>(params.subsample * static_cast<double>(n)));
      shuffled.resize(std::min(m, n));
      std::sort(shuffled.begin(), shuffled.end());
      round_samples = std::move(shuffled);
    } else {
      round_samples = all_samples;
    }

    TreeBuilder builder{x, order, grad, hess, params.max_depth,
                        std::vector<char>(n, 0), RegressionTree{}};
    builder.build(round_samples, 0);
    RegressionTree tree = std::move(builder.tree);

    for (std::size_t i = 0; i < n; ++i) {
      // walk using the column-major matrix
      int idx = 0;
      while (tree.nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const auto& tn = tree.nodes[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(tn.feature)][i] < tn.threshold ? tn.left
                                                                        : tn.right;
      }
      score[i] += params.learning_rate *
                  tree.nodes[static_cast<std::size_t>(idx)].leaf_value;
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::pair<CohortLabel, double> predict(const RiskModel& model,
                                       const FeatureVector& fv) {
  if (fv.values.size() != model.layout.values_length() ||
      fv.mask.size() != model.layout.spec_ids.size()) {
    throw DimensionMismatch("predict: feature vector for " + fv.driver_id +
                            " does not match the model layout");
  }
  const auto row = augmented_row(fv);
  double z = model.initial_score;
  for (const auto& tree : model.trees) {
    z += model.params.learning_rate * tree.predict(row);
  }
  const double score = sigmoid(z);
  return {score >= 0.5 ? CohortLabel::HighRisk : CohortLabel::LowRisk, score};
}

RiskModel train_baseline(
    const std::map<std::string, std::map<std::string, FeatureMap>>& avg_maps_by_driver,
    const std::map<std::string, DriverRecord>& records, const GbcParams& params,
    const std::set<SpecGroup>& groups) {
  const auto selected = specs_for_groups(groups);
  if (selected.empty()) {
    throw ConfigInvalid("train_baseline: group selection matches no specs");
  }

  ModelLayout layout;
  layout.y_bins = selected.front().y_bins;
  layout.x_bins = selected.front().x_bins;
  for (const auto& s : selected) layout.spec_ids.push_back(s.id);

  std::vector<FeatureVector> features;
  std::vector<int> labels;
  for (const auto& [driver, maps] : avg_maps_by_driver) {
    const auto rec = records.find(driver);
    if (rec == records.end()) {
      throw DriverSetMismatch("train_baseline: no record for driver " + driver);
    }
    std::map<std::string, std::vector<double>> cells;
    for (const auto& [spec_id, fm] : maps) cells.emplace(spec_id, fm.cells);
    features.push_back(vectorize(driver, cells, selected));
    labels.push_back(rec->second.risk_score() > 0 ? 1 : 0);
  }

  return train_gbc(features, labels, params, ModelMode::Baseline,
                   {groups.begin(), groups.end()}, layout);
}

}  // namespace riskmap
