#include "riskmap/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "riskmap/errors.hpp"
#include "riskmap/parallel.hpp"

namespace riskmap {

double hellinger_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw LengthMismatch("hellinger_distance: vector lengths differ");
  }
  double sum_p = 0.0, sum_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) {
      throw NotADistribution("hellinger_distance: negative entry");
    }
    sum_p += p[i];
    sum_q += q[i];
  }
  if (std::abs(sum_p - 1.0) > 1e-6 || std::abs(sum_q - 1.0) > 1e-6) {
    throw NotADistribution("hellinger_distance: entries do not sum to 1");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    acc += d * d;
  }
  return 0.5 * std::sqrt(acc);
}

HistogramMatrix obtain_histogram_matrix(std::span<const FeatureMap> maps, int h_bins) {
  if (maps.empty()) {
    throw EmptyInput("obtain_histogram_matrix: no maps");
  }
  if (h_bins < 2) {
    throw ConfigInvalid("obtain_histogram_matrix: h_bins must be >= 2");
  }
  const auto& first = maps.front();

  HistogramMatrix hm;
  hm.spec_id = first.spec_id;
  hm.y_bins = first.y_bins;
  hm.x_bins = first.x_bins;
  hm.h_bins = h_bins;
  hm.contributing_maps = maps.size();
  const std::size_t n_cells = first.cells.size();
  hm.data.assign(n_cells * static_cast<std::size_t>(h_bins), 0.0);

  for (const auto& m : maps) {
    if (m.spec_id != first.spec_id || m.cells.size() != n_cells) {
      throw SpecMismatch("obtain_histogram_matrix: mixed specs");
    }
    for (std::size_t c = 0; c < n_cells; ++c) {
      // value range [0,1], uniform bins, last bin closed
      int b = static_cast<int>(m.cells[c] * h_bins);
      b = std::clamp(b, 0, h_bins - 1);
      hm.data[c * h_bins + b] += 1.0;
    }
  }
  const double n = static_cast<double>(maps.size());
  for (auto& v : hm.data) v /= n;
  return hm;
}

DeviationMatrix obtain_difference(const HistogramMatrix& base,
                                  const HistogramMatrix& other) {
  if (base.spec_id != other.spec_id || base.y_bins != other.y_bins ||
      base.x_bins != other.x_bins || base.h_bins != other.h_bins) {
    throw SpecMismatch("obtain_difference: histogram matrices do not match");
  }
  DeviationMatrix dm;
  dm.spec_id = base.spec_id;
  dm.y_bins = base.y_bins;
  dm.x_bins = base.x_bins;
  dm.cells.resize(static_cast<std::size_t>(base.y_bins) * base.x_bins);
  for (int y = 0; y < base.y_bins; ++y) {
    for (int x = 0; x < base.x_bins; ++x) {
      dm.cells[static_cast<std::size_t>(y) * base.x_bins + x] =
          hellinger_distance(base.cell(y, x), other.cell(y, x));
    }
  }
  return dm;
}

DeviationMatrix summarize(std::span<const DeviationMatrix> diffs) {
  if (diffs.empty()) {
    throw EmptyInput("summarize: no deviation matrices");
  }
  const auto& first = diffs.front();
  DeviationMatrix out;
  out.spec_id = first.spec_id;
  out.y_bins = first.y_bins;
  out.x_bins = first.x_bins;
  out.cells.assign(first.cells.size(), 0.0);
  // incremental mean: exact when all inputs coincide
  double seen = 0.0;
  for (const auto& d : diffs) {
    if (d.spec_id != first.spec_id || d.cells.size() != first.cells.size()) {
      throw SpecMismatch("summarize: mixed specs");
    }
    seen += 1.0;
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
      out.cells[i] += (d.cells[i] - out.cells[i]) / seen;
    }
  }
  return out;
}

ReferenceSplit split_reference(std::vector<std::string> driver_ids,
                               double base_fraction, std::uint64_t seed) {
  if (!(base_fraction > 0.0) || !(base_fraction < 1.0)) {
    throw ConfigInvalid("split_reference: base fraction must be in (0, 1)");
  }
  if (driver_ids.size() < 2) {
    throw InsufficientData("split_reference: need at least 2 reference drivers");
  }
  std::sort(driver_ids.begin(), driver_ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(driver_ids.begin(), driver_ids.end(), rng);

  const auto n_base = static_cast<std::size_t>(
      std::llround(base_fraction * static_cast<double>(driver_ids.size())));
  const std::size_t cut = std::clamp<std::size_t>(n_base, 1, driver_ids.size() - 1);

  ReferenceSplit split;
  split.seed = seed;
  split.base.assign(driver_ids.begin(), driver_ids.begin() + static_cast<std::ptrdiff_t>(cut));
  split.control.assign(driver_ids.begin() + static_cast<std::ptrdiff_t>(cut), driver_ids.end());
  std::sort(split.base.begin(), split.base.end());
  std::sort(split.control.begin(), split.control.end());
  return split;
}

namespace {

// Raw maps with at least one qualifying sample; empty maps carry no signal
// for the spec and would concentrate histogram mass in the zero bin.
std::vector<FeatureMap> valid_maps(const std::vector<KinematicTrajectory>& trajectories,
                                   const FeatureMapSpec& spec) {
  std::vector<FeatureMap> maps;
  maps.reserve(trajectories.size());
  for (const auto& kt : trajectories) {
    FeatureMap fm = build_raw_feature_map(kt, spec);
    if (fm.sample_count > 0) maps.push_back(std::move(fm));
  }
  return maps;
}

}  // namespace

DeviationModel fit_deviation_model(
    const std::vector<KinematicTrajectory>& base_trajectories,
    const std::map<std::string, std::vector<KinematicTrajectory>>& control_by_driver,
    std::span<const FeatureMapSpec> specs, const DeviationModelConfig& cfg) {
  if (base_trajectories.empty() || control_by_driver.empty()) {
    throw EmptyInput("fit_deviation_model: base and control sets must be non-empty");
  }
  for (const auto& [driver, trajs] : control_by_driver) {
    if (trajs.size() < cfg.min_control_trajectories) {
      throw InsufficientData("fit_deviation_model: control driver " + driver +
                             " has fewer than " +
                             std::to_string(cfg.min_control_trajectories) +
                             " trajectories");
    }
  }

  DeviationModel model;
  model.h_bins = cfg.h_bins;

  std::vector<std::optional<SpecDeviationStats>> per_spec(specs.size());
  parallel_for(specs.size(), cfg.workers, [&](std::size_t si) {
    const auto& spec = specs[si];
    const auto base_maps = valid_maps(base_trajectories, spec);
    if (base_maps.empty()) return;
    HistogramMatrix base_hm = obtain_histogram_matrix(base_maps, cfg.h_bins);

    std::vector<DeviationMatrix> diffs;
    for (const auto& [driver, trajs] : control_by_driver) {
      const auto ctrl_maps = valid_maps(trajs, spec);
      if (ctrl_maps.empty()) continue;
      diffs.push_back(
          obtain_difference(base_hm, obtain_histogram_matrix(ctrl_maps, cfg.h_bins)));
    }
    if (diffs.empty()) return;

    per_spec[si] = SpecDeviationStats{std::move(base_hm), summarize(diffs)};
  });

  for (std::size_t si = 0; si < specs.size(); ++si) {
    if (per_spec[si]) {
      model.per_spec.emplace(specs[si].id, std::move(*per_spec[si]));
    }
  }
  return model;
}

std::map<std::string, DeviationFeatureMap> driver_deviation_maps(
    const DeviationModel& model, const std::string& driver_id,
    const std::vector<KinematicTrajectory>& trajectories,
    std::span<const FeatureMapSpec> specs) {
  std::map<std::string, DeviationFeatureMap> out;
  for (const auto& spec : specs) {
    const auto it = model.per_spec.find(spec.id);
    if (it == model.per_spec.end()) continue;
    const auto maps = valid_maps(trajectories, spec);
    if (maps.empty()) continue;

    const HistogramMatrix hm = obtain_histogram_matrix(maps, model.h_bins);
    const DeviationMatrix observed = obtain_difference(it->second.base, hm);
    const DeviationMatrix& natural = it->second.natural;

    DeviationFeatureMap dev;
    dev.spec_id = spec.id;
    dev.driver_id = driver_id;
    dev.y_bins = observed.y_bins;
    dev.x_bins = observed.x_bins;
    dev.cells.resize(observed.cells.size());
    for (std::size_t i = 0; i < observed.cells.size(); ++i) {
      dev.cells[i] = observed.cells[i] - natural.cells[i];
    }
    out.emplace(spec.id, std::move(dev));
  }
  return out;
}

DeviationMapSet build_deviation_maps(
    const std::vector<KinematicTrajectory>& base_trajectories,
    const std::map<std::string, std::vector<KinematicTrajectory>>& control_by_driver,
    const std::map<std::string, std::vector<KinematicTrajectory>>& observed_by_driver,
    std::span<const FeatureMapSpec> specs, const DeviationModelConfig& cfg) {
  DeviationMapSet set;
  set.model = fit_deviation_model(base_trajectories, control_by_driver, specs, cfg);

  std::vector<const std::string*> drivers;
  drivers.reserve(observed_by_driver.size());
  std::vector<const std::vector<KinematicTrajectory>*> trajs;
  for (const auto& [driver, t] : observed_by_driver) {
    drivers.push_back(&driver);
    trajs.push_back(&t);
  }

  std::vector<std::map<std::string, DeviationFeatureMap>> results(drivers.size());
  parallel_for(drivers.size(), cfg.workers, [&](std::size_t i) {
    results[i] = driver_deviation_maps(set.model, *drivers[i], *trajs[i], specs);
  });

  for (std::size_t i = 0; i < drivers.size(); ++i) {
    for (const auto& spec : specs) {
      if (!results[i].count(spec.id)) {
        set.missing.emplace_back(*drivers[i], spec.id);
      }
    }
    set.by_driver.emplace(*drivers[i], std::move(results[i]));
  }
  return set;
}

}  // namespace riskmap
