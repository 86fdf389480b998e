#include "riskmap/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "riskmap/errors.hpp"

namespace riskmap {
namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::vector<double>> seed_plus_plus(
    const std::vector<std::vector<double>>& pts, int k, std::mt19937_64& rng) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> centers;
  centers.reserve(static_cast<std::size_t>(k));
  centers.push_back(pts[rng() % n]);

  std::vector<double> d2(n);
  while (centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, sq_dist(pts[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // all remaining points coincide with a center; any choice is equivalent
      centers.push_back(pts[centers.size() % n]);
      continue;
    }
    const double r = uniform01(rng) * total;
    double cum = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      cum += d2[i];
      if (cum >= r) {
        pick = i;
        break;
      }
    }
    centers.push_back(pts[pick]);
  }
  return centers;
}

KMeansResult lloyd(const std::vector<std::vector<double>>& pts, int k,
                   std::mt19937_64& rng) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.front().size();

  KMeansResult res;
  res.centroids = seed_plus_plus(pts, k, rng);
  res.assignments.assign(n, -1);

  constexpr int kMaxIters = 300;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(pts[i], res.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(pts[i], res.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.assignments[i] != best) {
        res.assignments[i] = best;
        changed = true;
      }
    }

    // repair empty clusters from the farthest point
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int a : res.assignments) ++sizes[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t far_i = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(res.assignments[i])] <= 1) continue;
        const double d = sq_dist(pts[i], res.centroids[static_cast<std::size_t>(res.assignments[i])]);
        if (d > far_d) {
          far_d = d;
          far_i = i;
        }
      }
      if (far_d <= 0.0) break;  // fully degenerate input, leave cluster empty
      --sizes[static_cast<std::size_t>(res.assignments[far_i])];
      res.assignments[far_i] = c;
      ++sizes[static_cast<std::size_t>(c)];
      changed = true;
    }

    // recompute centroids
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                          std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.assignments[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += pts[i][j];
    }
    for (int c = 0; c < k; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      if (counts[cu] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        res.centroids[cu][j] = sums[cu][j] / static_cast<double>(counts[cu]);
      }
    }

    if (!changed) break;
  }

  res.wcss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.wcss += sq_dist(pts[i], res.centroids[static_cast<std::size_t>(res.assignments[i])]);
  }
  return res;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& vectors, int k,
                    std::uint64_t seed, int restarts) {
  if (k < 1) {
    throw ConfigInvalid("kmeans: k must be >= 1");
  }
  if (vectors.size() < static_cast<std::size_t>(k)) {
    throw TooFewPoints("kmeans: " + std::to_string(vectors.size()) +
                       " points for k=" + std::to_string(k));
  }
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw DimensionMismatch("kmeans: inconsistent vector lengths");
    }
  }
  std::set<std::vector<double>> distinct;
  for (const auto& v : vectors) {
    distinct.insert(v);
    if (distinct.size() >= static_cast<std::size_t>(k)) break;
  }
  if (distinct.size() < static_cast<std::size_t>(k)) {
    throw TooFewPoints("kmeans: fewer than " + std::to_string(k) +
                       " distinct vectors");
  }
  if (restarts < 1) restarts = 1;

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r) * 0x9E3779B97F4A7C15ULL);
    KMeansResult run = lloyd(vectors, k, rng);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

}  // namespace riskmap
