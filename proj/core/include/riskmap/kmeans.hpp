#pragma once

#include <cstdint>
#include <vector>

namespace riskmap {

struct KMeansResult {
  std::vector<int> assignments;               // one per input vector
  std::vector<std::vector<double>> centroids;  // k centroids
  double wcss = 0.0;  // within-cluster sum of squared distances
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` runs by WCSS.
/// Deterministic for a given seed. Empty clusters are repaired by reseeding
/// from the point farthest from its centroid. Throws TooFewPoints when there
/// are fewer vectors than clusters.
KMeansResult kmeans(const std::vector<std::vector<double>>& vectors, int k,
                    std::uint64_t seed, int restarts);

}  // namespace riskmap
