#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "riskmap/deviation.hpp"
#include "riskmap/feature_map.hpp"
#include "riskmap/kmeans.hpp"

namespace riskmap {

/// Weak ground truth: traffic citations plus at-fault accidents.
struct DriverRecord {
  std::string driver_id;
  int citations = 0;
  int at_fault_accidents = 0;

  int risk_score() const { return citations + at_fault_accidents; }
};

enum class CohortLabel { LowRisk, MediumRisk, HighRisk, Null };

std::string to_string(CohortLabel label);
CohortLabel cohort_label_from_string(const std::string& s);

struct CohortConfig {
  int k = 2;
  double confidence = 0.8;  // in (0.5, 1]
  std::uint64_t seed = 0;
  int restarts = 10;
  unsigned workers = 1;
};

/// Per-cluster cohort labels from the weak records: clusters ranked by mean
/// risk score (ties: larger cluster first, then lower index); the lowest rank
/// is LowRisk, the highest HighRisk, anything between MediumRisk. Throws
/// EmptyCluster.
std::vector<CohortLabel> clustering_label_to_risk_cohort_label(
    const std::vector<int>& assignments, int k,
    const std::vector<double>& risk_scores);

/// Modal label when its share of the available labels reaches `confidence`,
/// otherwise Null. An empty label list yields Null.
CohortLabel find_frequent_label(const std::vector<CohortLabel>& labels,
                                double confidence);

struct DriverVotes {
  int low = 0;
  int medium = 0;
  int high = 0;
  int total() const { return low + medium + high; }
};

struct CohortOutcome {
  std::map<std::string, CohortLabel> final_labels;  // every driver, may be Null
  std::map<std::string, DriverVotes> votes;
  std::vector<std::string> warnings;  // skipped/degenerate specs

  std::map<std::string, CohortLabel> labeled_set() const;
};

/// Algorithm: per spec (canonical order), cluster drivers by their flattened
/// deviation maps, label the clusters from the weak records, and accumulate
/// cohort votes; a driver's final label is the confidence-thresholded modal
/// vote. Specs with too few drivers or degenerate clusterings are skipped
/// with a warning.
CohortOutcome identify_risk_cohorts(
    const std::map<std::string, std::map<std::string, DeviationFeatureMap>>& maps_by_driver,
    std::span<const FeatureMapSpec> specs, const CohortConfig& config,
    const std::map<std::string, DriverRecord>& records);

}  // namespace riskmap
