#include "riskmap/cohorts.hpp"

#include <algorithm>
#include <numeric>

#include "riskmap/errors.hpp"

namespace riskmap {

std::string to_string(CohortLabel label) {
  switch (label) {
    case CohortLabel::LowRisk: return "LowRisk";
    case CohortLabel::MediumRisk: return "MediumRisk";
    case CohortLabel::HighRisk: return "HighRisk";
    case CohortLabel::Null: return "Null";
  }
  return "?";
}

CohortLabel cohort_label_from_string(const std::string& s) {
  if (s == "LowRisk") return CohortLabel::LowRisk;
  if (s == "MediumRisk") return CohortLabel::MediumRisk;
  if (s == "HighRisk") return CohortLabel::HighRisk;
  if (s == "Null") return CohortLabel::Null;
  throw ConfigInvalid("unknown cohort label: " + s);
}

std::vector<CohortLabel> clustering_label_to_risk_cohort_label(
    const std::vector<int>& assignments, int k,
    const std::vector<double>& risk_scores) {
  if (assignments.size() != risk_scores.size()) {
    throw DimensionMismatch("cohort labeling: assignments/records size mismatch");
  }
  std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignments[i]);
    sum[c] += risk_scores[i];
    ++size[c];
  }
  for (int c = 0; c < k; ++c) {
    if (size[static_cast<std::size_t>(c)] == 0) {
      throw EmptyCluster("cohort labeling: cluster " + std::to_string(c) + " is empty");
    }
  }

  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double mean_a = sum[static_cast<std::size_t>(a)] / static_cast<double>(size[static_cast<std::size_t>(a)]);
    const double mean_b = sum[static_cast<std::size_t>(b)] / static_cast<double>(size[static_cast<std::size_t>(b)]);
    if (mean_a != mean_b) return mean_a < mean_b;
    if (size[static_cast<std::size_t>(a)] != size[static_cast<std::size_t>(b)]) {
      return size[static_cast<std::size_t>(a)] > size[static_cast<std::size_t>(b)];
    }
    return a < b;
  });

  std::vector<CohortLabel> labels(static_cast<std::size_t>(k), CohortLabel::MediumRisk);
  labels[static_cast<std::size_t>(order.front())] = CohortLabel::LowRisk;
  labels[static_cast<std::size_t>(order.back())] = CohortLabel::HighRisk;
  return labels;
}

CohortLabel find_frequent_label(const std::vector<CohortLabel>& labels,
                                double confidence) {
  if (labels.empty()) return CohortLabel::Null;
  int counts[3] = {0, 0, 0};
  for (const auto l : labels) {
    if (l != CohortLabel::Null) ++counts[static_cast<int>(l)];
  }
  const int total = counts[0] + counts[1] + counts[2];
  if (total == 0) return CohortLabel::Null;

  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  const double share = static_cast<double>(counts[best]) / static_cast<double>(total);
  return share >= confidence ? static_cast<CohortLabel>(best) : CohortLabel::Null;
}

std::map<std::string, CohortLabel> CohortOutcome::labeled_set() const {
  std::map<std::string, CohortLabel> out;
  for (const auto& [driver, label] : final_labels) {
    if (label != CohortLabel::Null) out.emplace(driver, label);
  }
  return out;
}

CohortOutcome identify_risk_cohorts(
    const std::map<std::string, std::map<std::string, DeviationFeatureMap>>& maps_by_driver,
    std::span<const FeatureMapSpec> specs, const CohortConfig& config,
    const std::map<std::string, DriverRecord>& records) {
  if (config.k < 2) {
    throw ConfigInvalid("identify_risk_cohorts: k must be >= 2");
  }
  if (!(config.confidence > 0.5) || config.confidence > 1.0) {
    throw ConfigInvalid("identify_risk_cohorts: confidence must be in (0.5, 1]");
  }

  const std::size_t min_specs = (specs.size() + 1) / 2;
  for (const auto& [driver, maps] : maps_by_driver) {
    std::size_t in_scope = 0;
    for (const auto& spec : specs) in_scope += maps.count(spec.id);
    if (in_scope < min_specs) {
      throw InsufficientData("identify_risk_cohorts: driver " + driver + " has " +
                             std::to_string(in_scope) + " of " +
                             std::to_string(specs.size()) + " deviation maps");
    }
    if (!records.count(driver)) {
      throw DriverSetMismatch("identify_risk_cohorts: no record for driver " + driver);
    }
  }

  CohortOutcome outcome;
  std::map<std::string, std::vector<CohortLabel>> votes;
  for (const auto& [driver, _] : maps_by_driver) votes[driver] = {};

  std::size_t spec_index = 0;
  for (const auto& spec : specs) {
    const std::uint64_t spec_seed =
        config.seed + static_cast<std::uint64_t>(spec_index) * 0x9E3779B97F4A7C15ULL;
    ++spec_index;

    std::vector<std::string> drivers;
    std::vector<std::vector<double>> points;
    std::vector<double> scores;
    for (const auto& [driver, maps] : maps_by_driver) {
      const auto it = maps.find(spec.id);
      if (it == maps.end()) continue;
      drivers.push_back(driver);
      points.push_back(it->second.cells);
      scores.push_back(static_cast<double>(records.at(driver).risk_score()));
    }

    if (points.size() < static_cast<std::size_t>(config.k)) {
      outcome.warnings.push_back(spec.id + ": skipped, only " +
                                 std::to_string(points.size()) + " drivers");
      continue;
    }

    try {
      const KMeansResult res = kmeans(points, config.k, spec_seed, config.restarts);
      const auto cluster_labels =
          clustering_label_to_risk_cohort_label(res.assignments, config.k, scores);
      for (std::size_t i = 0; i < drivers.size(); ++i) {
        votes[drivers[i]].push_back(
            cluster_labels[static_cast<std::size_t>(res.assignments[i])]);
      }
    } catch (const EmptyCluster&) {
      outcome.warnings.push_back(spec.id + ": skipped, degenerate clustering");
    } catch (const TooFewPoints& e) {
      outcome.warnings.push_back(spec.id + ": skipped, " + e.what());
    }
  }

  for (const auto& [driver, labels] : votes) {
    DriverVotes v;
    for (const auto l : labels) {
      if (l == CohortLabel::LowRisk) ++v.low;
      if (l == CohortLabel::MediumRisk) ++v.medium;
      if (l == CohortLabel::HighRisk) ++v.high;
    }
    outcome.votes[driver] = v;
    outcome.final_labels[driver] = find_frequent_label(labels, config.confidence);
  }
  return outcome;
}

}  // namespace riskmap
