#pragma once

// Property suites for every module's documented invariants. Each function
// runs `cases` randomized checks (where randomization applies) and returns
// human-readable failure descriptions; an empty vector means the suite
// passed. Shared between the unit tests and the acceptance runner.

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "riskmap/cohorts.hpp"
#include "riskmap/context.hpp"
#include "riskmap/deviation.hpp"
#include "riskmap/errors.hpp"
#include "riskmap/feature_map.hpp"
#include "riskmap/gbc.hpp"
#include "riskmap/geo.hpp"
#include "riskmap/kmeans.hpp"
#include "riskmap/pipeline.hpp"
#include "riskmap/solar.hpp"
#include "riskmap/synth.hpp"
#include "riskmap/trajectory.hpp"
#include "support/fixtures.hpp"
#include "support/test_rng.hpp"

namespace riskmap::testing {

using Failures = std::vector<std::string>;

#define RM_FAIL(out, msg)                 \
  do {                                    \
    std::ostringstream os_;               \
    os_ << msg;                           \
    (out).push_back(os_.str());           \
    if ((out).size() > 5) return (out);   \
  } while (0)

// ---- trajectory-core ---------------------------------------------------

inline Failures trajectory_core_invariants(int cases = 200) {
  Failures out;
  TestRng rng(101);

  for (int c = 0; c < cases; ++c) {
    const GeoPoint p1{rng.uniform(-89, 89), rng.uniform(-179, 179)};
    const GeoPoint p2{rng.uniform(-89, 89), rng.uniform(-179, 179)};
    if (std::abs(haversine(p1, p2) - haversine(p2, p1)) >= 1e-9) {
      RM_FAIL(out, "haversine asymmetric at case " << c);
    }
  }

  // angle invariance under uniform scaling of the offsets around b
  for (int c = 0; c < cases; ++c) {
    const GeoPoint b{rng.uniform(-60, 60), rng.uniform(-170, 170)};
    const double dx1 = rng.uniform(-0.01, 0.01), dy1 = rng.uniform(-0.01, 0.01);
    const double dx2 = rng.uniform(-0.01, 0.01), dy2 = rng.uniform(-0.01, 0.01);
    if (std::hypot(dx1, dy1) < 1e-6 || std::hypot(dx2, dy2) < 1e-6) continue;
    const double s = rng.uniform(0.1, 5.0);
    const GeoPoint a{b.lat + dy1, b.lng + dx1};
    const GeoPoint cpt{b.lat + dy2, b.lng + dx2};
    const GeoPoint a2{b.lat + s * dy1, b.lng + s * dx1};
    const GeoPoint c2{b.lat + s * dy2, b.lng + s * dx2};
    const double t1 = angle_between(a, b, cpt);
    const double t2 = angle_between(a2, b, c2);
    if (std::abs(t1 - t2) > 1e-6) {
      RM_FAIL(out, "angle not scale-invariant: " << t1 << " vs " << t2);
    }
  }

  // reversed speed sequence negates accel values (uniform sampling)
  for (int c = 0; c < cases; ++c) {
    const int n = rng.uniform_int(2, 12);
    std::vector<double> speeds;
    for (int i = 0; i < n; ++i) speeds.push_back(rng.uniform(0.0, 30.0));
    const auto kt = derive_kinematics(straight_trajectory(speeds));
    std::vector<double> rev(speeds.rbegin(), speeds.rend());
    const auto kt_rev = derive_kinematics(straight_trajectory(rev));
    for (std::size_t i = 0; i < kt.kpoints.size(); ++i) {
      const double fwd = *kt.kpoints[i].accel;
      const double bwd = *kt_rev.kpoints[kt_rev.kpoints.size() - 1 - i].accel;
      if (fwd != -bwd) RM_FAIL(out, "reversed accel mismatch at case " << c);
    }
  }

  // every attribute finite or absent
  for (int c = 0; c < cases; ++c) {
    const int n = rng.uniform_int(2, 8);
    Trajectory traj;
    traj.id = "p";
    traj.driver_id = "p";
    double lat = rng.uniform(-60, 60), lng = rng.uniform(-170, 170);
    for (int i = 0; i < n; ++i) {
      TrajectoryPoint pt;
      pt.t = i * rng.uniform_int(1, 3) + (i > 0 ? traj.points[i - 1].t : 0) + (i > 0);
      pt.t = i == 0 ? 0 : traj.points[i - 1].t + rng.uniform_int(1, 3);
      pt.speed = rng.uniform(0, 40);
      pt.heading = rng.uniform(0, 359.99);
      if (!rng.coin(0.2)) {  // sometimes repeat the position exactly
        lat += rng.uniform(-1e-4, 1e-4);
        lng += rng.uniform(-1e-4, 1e-4);
      }
      pt.pos = GeoPoint{lat, lng};
      traj.points.push_back(pt);
    }
    const auto kt = derive_kinematics(traj);
    for (const auto& kp : kt.kpoints) {
      for (const auto& attr : {kp.accel, kp.angle_change, kp.angular_speed}) {
        if (attr && !std::isfinite(*attr)) {
          RM_FAIL(out, "non-finite attribute present at case " << c);
        }
      }
    }
  }
  return out;
}

// ---- context-annotate ----------------------------------------------------

inline Failures context_annotate_invariants(int cases = 200) {
  Failures out;
  TestRng rng(202);

  // road-type partition
  SpeedLimitGrid grid(0.01);
  for (int i = 0; i < 40; ++i) {
    grid.insert(GeoPoint{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)},
                rng.uniform(10.0, 90.0));
  }
  for (int c = 0; c < cases; ++c) {
    KinematicTrajectory kt;
    kt.daylight = Daylight::Day;
    const int n = rng.uniform_int(1, 20);
    for (int i = 0; i < n; ++i) {
      KinematicPoint kp;
      kp.pos = GeoPoint{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      kt.kpoints.push_back(kp);
    }
    const auto annotated = annotate_road_type(kt, grid);
    for (const auto& kp : annotated.kpoints) {
      const auto limit = grid.lookup(kp.pos);
      if (limit) {
        const bool urban = kp.road_type == RoadType::Urban;
        const bool highway = kp.road_type == RoadType::Highway;
        if (urban == highway) RM_FAIL(out, "known limit not partitioned");
        if (urban != (*limit < 50.0)) RM_FAIL(out, "urban boundary wrong");
      } else if (kp.road_type != RoadType::Unknown) {
        RM_FAIL(out, "unknown limit not Unknown");
      }
    }
  }

  // twilight monotonicity at 40N from winter to summer solstice
  {
    const GeoPoint pos{40.0, 0.0};
    const CivilDate dates[] = {{2019, 12, 21}, {2020, 2, 15}, {2020, 4, 15}, {2020, 6, 20}};
    double prev_dawn = 1e18, prev_dusk = -1e18;
    for (const auto& d : dates) {
      const auto w = civil_twilight(d, pos, 0);
      const double midnight = static_cast<double>(days_from_civil(d)) * 86400.0;
      const double dawn = static_cast<double>(w.civil_dawn) - midnight;
      const double dusk = static_cast<double>(w.civil_dusk) - midnight;
      if (dawn >= prev_dawn) RM_FAIL(out, "dawn not getting earlier toward summer");
      if (dusk <= prev_dusk) RM_FAIL(out, "dusk not getting later toward summer");
      prev_dawn = dawn;
      prev_dusk = dusk;
    }
  }

  // heading-offset invariance of turn detection + segment ordering
  for (int c = 0; c < cases; ++c) {
    KinematicTrajectory kt;
    kt.daylight = Daylight::Day;
    const int n = rng.uniform_int(5, 60);
    double heading = rng.uniform(0, 360);
    for (int i = 0; i < n; ++i) {
      KinematicPoint kp;
      kp.t = i;
      heading += rng.coin(0.2) ? rng.uniform(-30, 30) : rng.uniform(-3, 3);
      heading = std::fmod(std::fmod(heading, 360.0) + 360.0, 360.0);
      kp.heading = heading;
      kt.kpoints.push_back(kp);
    }
    auto shifted = kt;
    const double offset = rng.uniform(0, 360);
    for (auto& kp : shifted.kpoints) {
      kp.heading = std::fmod(kp.heading + offset, 360.0);
    }
    const auto segs_a = detect_turns(kt);
    const auto segs_b = detect_turns(shifted);
    if (segs_a.size() != segs_b.size()) {
      RM_FAIL(out, "turn count changed under heading offset");
    } else {
      for (std::size_t i = 0; i < segs_a.size(); ++i) {
        if (segs_a[i].start_index != segs_b[i].start_index ||
            segs_a[i].end_index != segs_b[i].end_index) {
          RM_FAIL(out, "turn segment indices changed under heading offset");
        }
      }
    }
    for (std::size_t i = 0; i < segs_a.size(); ++i) {
      if (std::abs(segs_a[i].cumulative_heading_change) < 25.0 - 1e-9) {
        RM_FAIL(out, "segment below threshold");
      }
      if (i > 0 && segs_a[i].start_index <= segs_a[i - 1].end_index) {
        RM_FAIL(out, "segments overlap or unsorted");
      }
    }
  }
  return out;
}

// ---- feature-maps ----------------------------------------------------------

inline Failures feature_maps_invariants(int cases = 200) {
  Failures out;
  TestRng rng(303);
  const auto& specs = builtin_specs();

  // group coverage: 3/5/6/3/3/2
  {
    std::map<SpecGroup, int> sizes;
    std::set<std::string> ids;
    for (const auto& s : specs) {
      ++sizes[s.group];
      ids.insert(s.id);
    }
    if (ids.size() != 22) RM_FAIL(out, "spec ids not unique");
    const std::map<SpecGroup, int> expected = {{SpecGroup::G1, 3}, {SpecGroup::G2, 5},
                                               {SpecGroup::G3, 6}, {SpecGroup::G4, 3},
                                               {SpecGroup::G5, 3}, {SpecGroup::G6, 2}};
    if (sizes != expected) RM_FAIL(out, "group sizes do not match");
  }

  for (int c = 0; c < cases; ++c) {
    auto kt = random_annotated_kt(rng);
    const auto& spec = specs[static_cast<std::size_t>(rng.uniform_int(0, 21))];

    // permutation invariance
    const auto fm = build_raw_feature_map(kt, spec);
    auto shuffled = kt;
    std::shuffle(shuffled.kpoints.begin(), shuffled.kpoints.end(), rng.raw());
    const auto fm2 = build_raw_feature_map(shuffled, spec);
    if (fm.cells != fm2.cells || fm.sample_count != fm2.sample_count) {
      RM_FAIL(out, "feature map changed under kpoint permutation");
    }

    // filter monotonicity vs the unfiltered spec
    auto unfiltered = spec;
    unfiltered.filter = ContextFilter{};
    const auto fm_all = build_raw_feature_map(kt, unfiltered);
    if (fm.sample_count > fm_all.sample_count) {
      RM_FAIL(out, "context filter increased sample count");
    }

    // cell range and max-normalization
    double max_cell = 0.0;
    for (const double v : fm.cells) {
      if (v < 0.0 || v > 1.0) RM_FAIL(out, "cell out of [0,1]");
      max_cell = std::max(max_cell, v);
    }
    if (fm.sample_count > 0 && std::abs(max_cell - 1.0) > 1e-12) {
      RM_FAIL(out, "max cell != 1 on non-empty map");
    }
    if (fm.sample_count == 0 && max_cell != 0.0) {
      RM_FAIL(out, "empty map not all-zero");
    }
  }
  return out;
}

// ---- deviation-engine -----------------------------------------------------

inline Failures deviation_engine_invariants(int cases = 200) {
  Failures out;
  TestRng rng(404);

  for (int c = 0; c < cases; ++c) {
    const int n = rng.uniform_int(2, 12);
    std::vector<double> p(n), q(n);
    double sp = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      p[i] = rng.uniform(0, 1);
      q[i] = rng.uniform(0, 1);
      sp += p[i];
      sq += q[i];
    }
    for (int i = 0; i < n; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    const double d_pq = hellinger_distance(p, q);
    const double d_qp = hellinger_distance(q, p);
    if (d_pq != d_qp) RM_FAIL(out, "hellinger not symmetric");
    if (d_pq < 0.0 || d_pq > kMaxHellinger + 1e-12) {
      RM_FAIL(out, "hellinger out of range: " << d_pq);
    }
    if (std::abs(hellinger_distance(p, p)) >= 1e-12) {
      RM_FAIL(out, "hellinger(p,p) != 0");
    }
  }

  // deviation map construction stays in bounds, deterministic, and identical
  // when drivers are featurized independently
  {
    const FeatureMapSpec spec = spec_by_id("T1");
    const std::vector<FeatureMapSpec> specs{spec};
    const auto make_kt = [&](int npts) {
      KinematicTrajectory kt = random_annotated_kt(rng, npts);
      kt.daylight = Daylight::Day;
      return kt;
    };
    std::vector<KinematicTrajectory> base;
    for (int i = 0; i < 30; ++i) base.push_back(make_kt(10));
    std::map<std::string, std::vector<KinematicTrajectory>> control, observed;
    for (int d = 0; d < 3; ++d) {
      for (int i = 0; i < 25; ++i) {
        control["c" + std::to_string(d)].push_back(make_kt(10));
        observed["o" + std::to_string(d)].push_back(make_kt(10));
      }
    }
    DeviationModelConfig cfg;
    cfg.workers = 1;
    const auto set1 = build_deviation_maps(base, control, observed, specs, cfg);
    cfg.workers = 4;
    const auto set2 = build_deviation_maps(base, control, observed, specs, cfg);
    for (const auto& [driver, maps] : set1.by_driver) {
      for (const auto& [sid, dev] : maps) {
        for (const double v : dev.cells) {
          if (v < -kMaxHellinger - 1e-12 || v > kMaxHellinger + 1e-12) {
            RM_FAIL(out, "deviation cell out of bounds");
          }
        }
        if (set2.by_driver.at(driver).at(sid).cells != dev.cells) {
          RM_FAIL(out, "deviation maps differ across worker counts");
        }
        const auto solo =
            driver_deviation_maps(set1.model, driver, observed.at(driver), specs);
        if (solo.at(sid).cells != dev.cells) {
          RM_FAIL(out, "independent featurization differs from batch");
        }
      }
    }
  }
  return out;
}

// ---- risk-cohorts -----------------------------------------------------------

inline Failures risk_cohorts_invariants(int cases = 200) {
  Failures out;
  TestRng rng(505);

  // kmeans argmin over restarts
  for (int c = 0; c < 40; ++c) {
    const int n = rng.uniform_int(4, 20);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < n; ++i) {
      pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    }
    const std::uint64_t seed = static_cast<std::uint64_t>(c) * 77 + 1;
    const auto best = kmeans(pts, 2, seed, 8);
    for (int r = 0; r < 8; ++r) {
      const auto single = kmeans(pts, 2, seed + static_cast<std::uint64_t>(r) * 0x9E3779B97F4A7C15ULL, 1);
      if (best.wcss > single.wcss + 1e-9) {
        RM_FAIL(out, "restart " << r << " beat the returned kmeans result");
      }
    }
  }

  // relabeling invariance: permuting cluster indices does not change driver
  // labels (away from exact ties)
  for (int c = 0; c < cases; ++c) {
    const int n = rng.uniform_int(4, 30);
    std::vector<int> assign(n);
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) {
      assign[i] = rng.uniform_int(0, 1);
      scores[i] = rng.uniform(0, 4);
    }
    bool both = false, first = false, second = false;
    for (const int a : assign) (a == 0 ? first : second) = true;
    both = first && second;
    if (!both) continue;
    const auto labels = clustering_label_to_risk_cohort_label(assign, 2, scores);
    std::vector<int> flipped(n);
    for (int i = 0; i < n; ++i) flipped[i] = 1 - assign[i];
    const auto labels_f = clustering_label_to_risk_cohort_label(flipped, 2, scores);
    for (int i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(assign[i])] !=
          labels_f[static_cast<std::size_t>(flipped[i])]) {
        RM_FAIL(out, "driver label changed under cluster index permutation");
      }
    }
  }

  // voting monotonicity and label accounting
  for (int c = 0; c < cases; ++c) {
    const int n = rng.uniform_int(0, 25);
    std::vector<CohortLabel> labels;
    for (int i = 0; i < n; ++i) {
      labels.push_back(rng.coin() ? CohortLabel::LowRisk : CohortLabel::HighRisk);
    }
    const double c_low = rng.uniform(0.51, 1.0);
    const double c_high = rng.uniform(c_low, 1.0);
    const auto l_low = find_frequent_label(labels, c_low);
    const auto l_high = find_frequent_label(labels, c_high);
    if (l_low == CohortLabel::Null && l_high != CohortLabel::Null) {
      RM_FAIL(out, "raising confidence added a driver to the labeled set");
    }
  }
  return out;
}

// ---- risk-classifier ---------------------------------------------------------

inline Failures risk_classifier_invariants(int cases = 200) {
  Failures out;
  TestRng rng(606);

  // vector layout stability: selection is a prefix-order restriction
  for (int c = 0; c < cases; ++c) {
    std::set<SpecGroup> small = {SpecGroup::G1};
    std::set<SpecGroup> large = {SpecGroup::G1, SpecGroup::G4};
    const auto specs_small = specs_for_groups(small);
    const auto specs_large = specs_for_groups(large);
    std::map<std::string, std::vector<double>> maps;
    for (const auto& s : specs_large) {
      if (!rng.coin(0.3)) {
        std::vector<double> cells(static_cast<std::size_t>(s.y_bins) * s.x_bins);
        for (auto& v : cells) v = rng.uniform(0, 1);
        maps[s.id] = cells;
      }
    }
    FeatureVector fv_small, fv_large;
    try {
      fv_small = vectorize("d", maps, specs_small);
      fv_large = vectorize("d", maps, specs_large);
    } catch (const TooSparse&) {
      continue;
    }
    std::size_t offset = 0;
    for (std::size_t si = 0; si < specs_large.size(); ++si) {
      const std::size_t cells = static_cast<std::size_t>(specs_large[si].y_bins) *
                                specs_large[si].x_bins;
      if (si < specs_small.size()) {  // G1 specs come first in canonical order
        for (std::size_t i = 0; i < cells; ++i) {
          if (fv_large.values[offset + i] != fv_small.values[offset + i]) {
            RM_FAIL(out, "selection is not a prefix restriction");
          }
        }
      }
      offset += cells;
    }
  }

  // determinism + prediction/score consistency + boosting sanity
  {
    std::vector<FeatureVector> feats;
    std::vector<int> labels;
    ModelLayout layout;
    layout.spec_ids = {"F"};
    layout.y_bins = 1;
    layout.x_bins = 2;
    for (int i = 0; i < 40; ++i) {
      FeatureVector fv;
      fv.driver_id = "d" + std::to_string(i);
      const double x = rng.uniform(-1, 1);
      fv.values = {x, rng.uniform(-1, 1)};
      fv.mask = {1.0};
      labels.push_back(x > 0 ? 1 : 0);
      feats.push_back(fv);
    }
    GbcParams params;
    params.num_estimators = 60;
    params.seed = 9;
    const auto m1 = train_gbc(feats, labels, params, ModelMode::Refined, {SpecGroup::G1}, layout);
    const auto m2 = train_gbc(feats, labels, params, ModelMode::Refined, {SpecGroup::G1}, layout);
    if (m1.trees.size() != m2.trees.size()) RM_FAIL(out, "tree count differs");
    for (std::size_t t = 0; t < m1.trees.size(); ++t) {
      const auto& ta = m1.trees[t].nodes;
      const auto& tb = m2.trees[t].nodes;
      if (ta.size() != tb.size()) RM_FAIL(out, "tree shape differs between runs");
      for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].feature != tb[i].feature || ta[i].threshold != tb[i].threshold ||
            ta[i].leaf_value != tb[i].leaf_value) {
          RM_FAIL(out, "tree nodes differ between runs");
        }
      }
    }
    for (int c = 0; c < cases; ++c) {
      FeatureVector fv;
      fv.driver_id = "q";
      fv.values = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      fv.mask = {1.0};
      const auto [label, score] = predict(m1, fv);
      if ((label == CohortLabel::HighRisk) != (score >= 0.5)) {
        RM_FAIL(out, "label/score inconsistency");
      }
    }

    // per-round training log-loss must not increase
    std::vector<double> f(feats.size(), m1.initial_score);
    double prev_loss = 1e18;
    for (const auto& tree : m1.trees) {
      for (std::size_t i = 0; i < feats.size(); ++i) {
        auto row = feats[i].values;
        row.insert(row.end(), feats[i].mask.begin(), feats[i].mask.end());
        f[i] += m1.params.learning_rate * tree.predict(row);
      }
      double loss = 0;
      for (std::size_t i = 0; i < feats.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-f[i]));
        loss += labels[i] ? -std::log(std::max(p, 1e-15))
                          : -std::log(std::max(1.0 - p, 1e-15));
      }
      loss /= static_cast<double>(feats.size());
      if (loss > prev_loss + 1e-12) RM_FAIL(out, "log-loss increased in a round");
      prev_loss = loss;
    }
  }
  return out;
}

// ---- synth-population ----------------------------------------------------------

inline Failures synth_population_invariants() {
  Failures out;

  // reference purity + planted separation + weak-label noise
  PopulationConfig pc;
  pc.n_reference = 5;
  pc.n_modeling = 200;
  pc.n_heldout = 1;
  pc.trajectories_per_driver = 1;
  pc.points_per_trajectory = 60;
  pc.risky_fraction = 0.5;
  pc.seed = 31;
  pc.workers = 4;
  const auto pop = generate_population(pc);
  for (const auto& d : pop.reference) {
    if (d.record.risk_score() != 0) RM_FAIL(out, "reference driver has records");
  }
  int risky_zero = 0, risky_n = 0, safe_rec = 0, safe_n = 0;
  for (const auto& d : pop.modeling) {
    if (d.profile.archetype == Archetype::Risky) {
      if (d.profile.planted_risk < 0.7) RM_FAIL(out, "risky planted_risk < 0.7");
      ++risky_n;
      risky_zero += d.record.risk_score() == 0;
    } else {
      if (d.profile.planted_risk > 0.3) RM_FAIL(out, "safe planted_risk > 0.3");
      ++safe_n;
      safe_rec += d.record.risk_score() > 0;
    }
  }
  if (risky_zero < risky_n / 5) {
    RM_FAIL(out, "too few risky drivers with zero records: " << risky_zero << "/" << risky_n);
  }
  if (safe_rec < safe_n / 10) {
    RM_FAIL(out, "too few safe drivers with records: " << safe_rec << "/" << safe_n);
  }

  // distributional separation on T1 mean maps, 50 drivers per archetype
  {
    TestRng rng(77);
    PopulationConfig pcc;
    pcc.seed = 11;
    pcc.trajectories_per_driver = 10;
    pcc.points_per_trajectory = 180;
    const auto& t1 = spec_by_id("T1");
    std::vector<double> mean_safe(400, 0), mean_risky(400, 0);
    for (int i = 0; i < 50; ++i) {
      for (const auto arch : {Archetype::Safe, Archetype::Risky}) {
        const std::string id = "sep-" + std::to_string(static_cast<int>(arch)) + "-" +
                               std::to_string(i);
        const auto prof = make_profile(id, arch, 11);
        std::vector<FeatureMap> ms;
        for (int k = 0; k < pcc.trajectories_per_driver; ++k) {
          const auto g = generate_trajectory(prof, pcc, k, GeoPoint{38.0, -95.0}, -360);
          auto kt = derive_kinematics(g.trajectory);
          detect_turns(kt);
          auto fm = build_raw_feature_map(kt, t1);
          if (fm.sample_count) ms.push_back(std::move(fm));
        }
        const auto avg = average_feature_map(ms);
        auto& acc = arch == Archetype::Safe ? mean_safe : mean_risky;
        for (int c = 0; c < 400; ++c) acc[static_cast<std::size_t>(c)] += avg.cells[static_cast<std::size_t>(c)] / 50.0;
      }
    }
    double diff = 0;
    for (int c = 0; c < 400; ++c) {
      diff += std::abs(mean_safe[static_cast<std::size_t>(c)] - mean_risky[static_cast<std::size_t>(c)]);
    }
    if (diff / 400.0 <= 0.01) {
      RM_FAIL(out, "archetype T1 maps not separated: " << diff / 400.0);
    }
  }
  return out;
}

// ---- pipeline-cli ---------------------------------------------------------------

inline Failures pipeline_report_invariants(int cases = 200) {
  Failures out;
  TestRng rng(808);
  for (int c = 0; c < cases; ++c) {
    const int n = rng.uniform_int(1, 40);
    std::vector<Prediction> preds;
    std::map<std::string, DriverRecord> records;
    for (int i = 0; i < n; ++i) {
      Prediction p;
      p.driver_id = "d" + std::to_string(i);
      p.label = rng.coin() ? CohortLabel::LowRisk : CohortLabel::HighRisk;
      p.score = rng.uniform(0, 1);
      preds.push_back(p);
      DriverRecord rec;
      rec.driver_id = p.driver_id;
      rec.citations = rng.uniform_int(0, 3);
      rec.at_fault_accidents = rng.uniform_int(0, 2);
      records[p.driver_id] = rec;
    }
    const auto report = compute_report(preds, records, nullptr);
    int total = 0;
    double share = 0.0, weighted_mean = 0.0;
    for (const auto& row : report.rows) {
      total += row.drivers;
      share += row.share_pct;
      weighted_mean += row.mean_risk_score * row.drivers;
    }
    if (total != report.total_drivers) RM_FAIL(out, "cohort counts do not sum");
    if (std::abs(share - 100.0) > 1e-9) RM_FAIL(out, "shares do not sum to 100");
    if (std::abs(weighted_mean / total - report.overall_mean_risk) > 1e-9) {
      RM_FAIL(out, "weighted cohort means do not recombine to overall mean");
    }
  }
  return out;
}

#undef RM_FAIL

}  // namespace riskmap::testing
