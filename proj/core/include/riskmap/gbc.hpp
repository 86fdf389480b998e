#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskmap/cohorts.hpp"
#include "riskmap/feature_map.hpp"

namespace riskmap {

struct GbcParams {
  double learning_rate = 0.1;
  int num_estimators = 300;
  int max_depth = 5;
  double subsample = 1.0;  // (0, 1]
  std::uint64_t seed = 0;
};

/// Binary regression-tree node. Internal nodes route x[feature] < threshold
/// to `left`, the rest to `right`; leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
};

enum class ModelMode { Refined, Baseline };

std::string to_string(ModelMode mode);
ModelMode model_mode_from_string(const std::string& s);

/// Feature layout a model was trained with; prediction inputs must match.
struct ModelLayout {
  std::vector<std::string> spec_ids;  // canonical T-order subset
  int y_bins = 0, x_bins = 0;

  std::size_t values_length() const {
    return spec_ids.size() * static_cast<std::size_t>(y_bins) *
           static_cast<std::size_t>(x_bins);
  }
};

struct RiskModel {
  int version = 1;
  ModelMode mode = ModelMode::Refined;
  std::vector<SpecGroup> groups;
  GbcParams params;
  ModelLayout layout;
  double initial_score = 0.0;  // log-odds prior
  std::vector<RegressionTree> trees;
};

/// Concatenation of flattened per-spec matrices in canonical T-order, with
/// absent maps zero-filled and flagged in the presence mask (one entry per
/// spec). The mask is appended to the values when a model consumes the
/// vector, so sparse-context drivers stay predictable.
struct FeatureVector {
  std::string driver_id;
  std::vector<double> values;
  std::vector<double> mask;
};

/// Specs belonging to the chosen groups, in canonical T-order.
std::vector<FeatureMapSpec> specs_for_groups(const std::set<SpecGroup>& groups);

/// Builds the fixed-layout vector for one driver from whatever per-spec
/// matrices are available. Throws TooSparse when fewer than half of the
/// selected specs have a map.
FeatureVector vectorize(const std::string& driver_id,
                        const std::map<std::string, std::vector<double>>& maps_by_spec,
                        std::span<const FeatureMapSpec> selected_specs);

/// Gradient boosting with logistic loss: the initial score is the label
/// log-odds and every round fits a depth-bounded least-squares tree to the
/// negative gradient (exhaustive threshold search; Newton leaf values).
/// Deterministic given the seed. Throws DegenerateLabels / DimensionMismatch.
RiskModel train_gbc(const std::vector<FeatureVector>& features,
                    const std::vector<int>& labels, const GbcParams& params,
                    ModelMode mode, const std::vector<SpecGroup>& groups,
                    const ModelLayout& layout);

/// Sigmoid ensemble score and the cohort label (HighRisk iff score >= 0.5).
std::pair<CohortLabel, double> predict(const RiskModel& model,
                                       const FeatureVector& fv);

/// The baseline variant: per-driver average raw feature maps as features and
/// the weak binary label (any record => 1).
RiskModel train_baseline(
    const std::map<std::string, std::map<std::string, FeatureMap>>& avg_maps_by_driver,
    const std::map<std::string, DriverRecord>& records, const GbcParams& params,
    const std::set<SpecGroup>& groups);

}  // namespace riskmap
