#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "atmen/action.hpp"
#include "atmen/construction.hpp"
#include "atmen/defaults.hpp"
#include "atmen/embedding.hpp"
#include "atmen/group.hpp"
#include "atmen/io.hpp"
#include "atmen/kernel.hpp"
#include "atmen/measure.hpp"
#include "atmen/rng.hpp"

namespace atmen::suite {

struct SuiteConfig {
  std::uint64_t seed = defaults::kDefaultSeed;
  /// Falsifiability fixture: flip the sign of the Mazur exponent so the
  /// gauge-transfer criterion must fail.
  bool mutate_mazur_exponent = false;
};

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string details;
  double elapsed_seconds = 0.0;
  double budget_seconds = 0.0;
  io::json artifact;  // canonical numeric outputs; never contains timings
};

struct SuiteReport {
  SuiteConfig config;
  std::vector<CriterionResult> results;

  bool all_passed() const {
    for (const auto& r : results) {
      if (!r.passed) return false;
    }
    return true;
  }
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// 1. The gauge(x-y)^p kernel on seeded random L_p point sets is CND for
//    p in {0.5, 1, 1.5, 2}.
inline CriterionResult cnd_lemma_suite(const SuiteConfig& cfg) {
  CriterionResult res;
  res.name = "cnd_lemma_suite";
  res.budget_seconds = 10.0;
  bool ok = true;
  double worst = -1.0;
  io::json art = io::json::array();
  const std::vector<double> ps{0.5, 1.0, 1.5, 2.0};
  for (std::size_t pi = 0; pi < ps.size(); ++pi) {
    const double p = ps[pi];
    for (int i = 0; i < 20; ++i) {
      Rng rng(cfg.seed + 1009ull * pi + static_cast<std::uint64_t>(i));
      const std::size_t atoms = 2 + static_cast<std::size_t>(i) % 7;   // <= 8
      const std::size_t count = 5 + (7 * static_cast<std::size_t>(i)) % 26;  // <= 30
      std::vector<double> weights(atoms);
      for (auto& w : weights) w = 0.5 + rng.uniform01();
      const measure::FiniteMeasureSpace space(weights);
      std::vector<measure::LpVector> pts;
      pts.reserve(count);
      for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> vals(atoms);
        for (auto& v : vals) v = rng.normal();
        pts.emplace_back(space, std::move(vals), p);
      }
      const auto K = kernels::lp_distance_kernel(pts, p);
      const auto r = kernels::cnd_test(K);
      const double rel = r.extremal_value / (1.0 + K.max_abs());
      ok = ok && r.is_cnd;
      worst = std::max(worst, rel);
      art.push_back(io::json{{"p", p}, {"case", i}, {"points", count}, {"atoms", atoms},
                             {"extremal", r.extremal_value}, {"relative_extremal", rel}});
    }
  }
  res.passed = ok;
  res.details = "80 kernels; worst relative extremal " + format_double(worst) +
                " against tolerance 1e-09";
  res.artifact = std::move(art);
  return res;
}

// 2. |x-y|^p on {0,1,2,3} for p in {2.5, 3} must fail with a positive witness;
//    at p = 3 the extremal value is 5 at the unit witness (1,-1,-1,1)/2.
inline CriterionResult negative_control(const SuiteConfig&) {
  CriterionResult res;
  res.name = "negative_control";
  res.budget_seconds = 1.0;
  bool ok = true;
  io::json art = io::json::array();
  const measure::FiniteMeasureSpace line({1.0});
  for (const double p : {2.5, 3.0}) {
    std::vector<measure::LpVector> pts;
    for (const double x : {0.0, 1.0, 2.0, 3.0}) pts.emplace_back(line, std::vector<double>{x}, p);
    const auto K = kernels::lp_distance_kernel(pts, p);
    const auto r = kernels::cnd_test(K);
    ok = ok && !r.is_cnd && r.extremal_value > 0.0;
    if (p == 3.0) {
      ok = ok && std::abs(r.extremal_value - 5.0) <= 1e-6;
      // witness is +-(1,-1,-1,1)/2: outer pair against inner pair
      ok = ok && r.witness.size() == 4;
      for (const double c : r.witness) ok = ok && std::abs(std::abs(c) - 0.5) <= 1e-6;
      if (r.witness.size() == 4) {
        ok = ok && r.witness[0] * r.witness[3] > 0 && r.witness[1] * r.witness[2] > 0 &&
             r.witness[0] * r.witness[1] < 0;
      }
    }
    art.push_back(io::json{{"p", p}, {"extremal", r.extremal_value}, {"witness", r.witness}});
  }
  res.passed = ok;
  res.details = "both exponents rejected; p=3 witness value within 1e-06 of 5";
  res.artifact = std::move(art);
  return res;
}

// 3. Powers K^alpha of generated CND kernels stay CND for alpha in
//    {0.1,...,0.9}; exp(-tK) is PSD for t in {0.1, 1, 10}.
inline CriterionResult schoenberg_closure(const SuiteConfig& cfg) {
  CriterionResult res;
  res.name = "schoenberg_closure";
  res.budget_seconds = 30.0;
  bool ok = true;
  double worst_cnd = -1.0;
  double worst_psd = 1.0;
  io::json art = io::json::array();
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 4 + static_cast<std::size_t>(i) % 12;
    const std::size_t dim = 1 + static_cast<std::size_t>(i) % 3;
    const auto K = kernels::random_cnd_kernel(n, dim, cfg.seed + 33ull * static_cast<std::uint64_t>(i));
    io::json entry{{"case", i}, {"n", n}, {"dim", dim}};
    io::json powers = io::json::array();
    for (int a = 1; a <= 9; ++a) {
      const double alpha = a / 10.0;
      const auto r = kernels::cnd_test(kernels::power_transform(K, alpha));
      ok = ok && r.is_cnd;
      worst_cnd = std::max(worst_cnd, r.extremal_value);
      powers.push_back(io::json{{"alpha", alpha}, {"extremal", r.extremal_value}});
    }
    io::json exps = io::json::array();
    for (const double t : {0.1, 1.0, 10.0}) {
      const auto er = kernels::exp_kernel_test(K, t);
      ok = ok && er.exp_psd;
      worst_psd = std::min(worst_psd, er.exp_min_eigenvalue);
      exps.push_back(io::json{{"t", t}, {"min_eigenvalue", er.exp_min_eigenvalue}});
    }
    entry["powers"] = std::move(powers);
    entry["exponentials"] = std::move(exps);
    art.push_back(std::move(entry));
  }
  res.passed = ok;
  res.details = "180 power transforms CND (worst extremal " + format_double(worst_cnd) +
                "), 60 exponentials PSD (worst eigenvalue " + format_double(worst_psd) + ")";
  res.artifact = std::move(art);
  return res;
}

// 4. The quadrature reproduces x^alpha through the subordination integral to
//    1e-6 relative error, with the constant c_alpha = alpha / Gamma(1 - alpha).
inline CriterionResult frullani_identity(const SuiteConfig&) {
  CriterionResult res;
  res.name = "frullani_identity";
  res.budget_seconds = 5.0;
  bool ok = true;
  double worst = 0.0;
  io::json art = io::json::array();
  const double c_half = 0.5 / std::tgamma(0.5);
  ok = ok && std::abs(c_half - 0.28209479177387814) <= 1e-9;  // 1/(2 sqrt(pi))
  for (const double x : {0.1, 1.0, 4.0, 10.0}) {
    for (const double alpha : {0.25, 0.5, 0.75}) {
      const double got = kernels::frullani_power(x, alpha);
      const double want = std::pow(x, alpha);
      const double rel = std::abs(got - want) / want;
      ok = ok && rel <= 1e-6;
      worst = std::max(worst, rel);
      art.push_back(io::json{{"x", x}, {"alpha", alpha}, {"quadrature", got}, {"exact", want},
                             {"relative_error", rel}});
    }
  }
  res.passed = ok;
  res.details = "12 (x, alpha) pairs; worst relative error " + format_double(worst) +
                "; c_{1/2} = " + format_double(c_half);
  res.artifact = std::move(art);
  return res;
}

// 5. Gauge transfer under the Mazur map on 1000 seeded vectors across p-pairs
//    from {0.5, 1, 1.5, 2, 3}; inverse round trip; exact permutation
//    equivariance.  The mutation fixture flips the exponent sign.
inline CriterionResult mazur_transfer(const SuiteConfig& cfg) {
  CriterionResult res;
  res.name = "mazur_transfer";
  res.budget_seconds = 5.0;
  bool ok = true;
  double worst_transfer = 0.0;
  double worst_round = 0.0;
  std::size_t vectors = 0;
  const std::vector<double> ps{0.5, 1.0, 1.5, 2.0, 3.0};
  std::uint64_t case_idx = 0;
  for (const double pf : ps) {
    for (const double pt : ps) {
      if (pf == pt) continue;
      for (int k = 0; k < 50; ++k) {
        Rng rng(cfg.seed + 7919ull * case_idx);
        ++case_idx;
        const std::size_t atoms = 2 + static_cast<std::size_t>(case_idx % 7);
        const measure::FiniteMeasureSpace space(std::vector<double>(atoms, 1.0));
        std::vector<double> vals(atoms);
        for (auto& v : vals) v = rng.normal();
        const measure::LpVector v(space, vals, pf);

        measure::LpVector u = measure::mazur_map(v, pf, pt);
        if (cfg.mutate_mazur_exponent) {
          const double e = -(pf / pt);
          for (std::size_t i = 0; i < atoms; ++i) {
            const double a = std::abs(v.values[i]);
            u.values[i] = (v.values[i] < 0 ? -1.0 : 1.0) * std::pow(a, e);
          }
        }

        const double sum_in = measure::pth_power_sum(v);
        const double sum_out = measure::pth_power_sum(u);
        worst_transfer = std::max(worst_transfer,
                                  std::abs(sum_out - sum_in) / (1.0 + std::abs(sum_in)));

        const auto back = measure::mazur_map(u, pt, pf);
        for (std::size_t i = 0; i < atoms; ++i) {
          worst_round = std::max(
              worst_round, std::abs(back.values[i] - v.values[i]) / (1.0 + std::abs(v.values[i])));
        }

        if (k % 10 == 0) {
          // permutation equivariance must be bitwise exact
          std::vector<std::size_t> perm(atoms);
          for (std::size_t i = 0; i < atoms; ++i) perm[i] = i;
          for (std::size_t i = atoms; i-- > 1;) std::swap(perm[i], perm[rng.index(i + 1)]);
          std::vector<double> permuted(atoms);
          for (std::size_t i = 0; i < atoms; ++i) permuted[perm[i]] = v.values[i];
          const auto mapped = measure::mazur_map(v, pf, pt);
          const auto mapped_permuted =
              measure::mazur_map(measure::LpVector(space, permuted, pf), pf, pt);
          for (std::size_t i = 0; i < atoms; ++i) {
            ok = ok && mapped_permuted.values[perm[i]] == mapped.values[i];
          }
        }
        ++vectors;
      }
    }
  }
  ok = ok && worst_transfer <= 1e-12 && worst_round <= 1e-10;
  res.passed = ok;
  res.details = std::to_string(vectors) + " vectors; worst transfer deviation " +
                format_double(worst_transfer) + ", worst round trip " + format_double(worst_round);
  res.artifact = io::json{{"vectors", vectors},
                          {"worst_transfer_deviation", worst_transfer},
                          {"worst_round_trip_deviation", worst_round},
                          {"exponent_mutated", cfg.mutate_mazur_exponent}};
  return res;
}

// 6. GNS round trip: embedding coordinates reproduce the kernel as squared
//    distances within 1e-8, on random point sets and on word-length kernels.
inline CriterionResult gns_round_trip(const SuiteConfig& cfg) {
  CriterionResult res;
  res.name = "gns_round_trip";
  res.budget_seconds = 10.0;
  bool ok = true;
  double worst = 0.0;
  io::json art = io::json::array();
  for (int i = 0; i < 5; ++i) {
    const auto K = kernels::random_cnd_kernel(6 + 3 * static_cast<std::size_t>(i),
                                              1 + static_cast<std::size_t>(i) % 4,
                                              cfg.seed + 101ull * static_cast<std::uint64_t>(i));
    const auto e = embedding::gns_embed(K);
    ok = ok && e.gram_residual <= defaults::kGnsResidualTarget;
    worst = std::max(worst, e.gram_residual);
    art.push_back(io::json{{"kernel", "random-" + std::to_string(i)}, {"size", K.size()},
                           {"dimension", e.dimension}, {"residual", e.gram_residual}});
  }
  for (const char* name : {"Z", "Z^2", "F2"}) {
    const auto spec = groups::GroupSpec::parse(name);
    const auto big = groups::ball(spec, 8);
    const auto small = groups::ball(spec, 4);
    const auto K = kernels::function_to_kernel(kernels::word_length_function(big), small);
    const auto e = embedding::gns_embed(K);
    ok = ok && e.gram_residual <= defaults::kGnsResidualTarget;
    worst = std::max(worst, e.gram_residual);
    art.push_back(io::json{{"kernel", std::string("word-length-") + name}, {"size", K.size()},
                           {"dimension", e.dimension}, {"residual", e.gram_residual}});
  }
  res.passed = ok;
  res.details = "8 embeddings; worst reconstruction residual " + format_double(worst) +
                " against target 1e-08";
  res.artifact = std::move(art);
  return res;
}

// 7. Tree fixture: the geodesic-chain cocycle realizes the word metric
//    exactly in every L_p gauge; the cocycle identity holds to 1e-12; the
//    induced psi is CND for p in {1, 1.5}.
inline CriterionResult tree_fixture(const SuiteConfig&) {
  CriterionResult res;
  res.name = "tree_fixture";
  res.budget_seconds = 20.0;
  bool ok = true;
  io::json art = io::json::array();
  const auto spec = groups::GroupSpec::parse("F2");
  const auto b = groups::ball(spec, 4);
  for (const double p : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const auto act = actions::tree_cocycle(2, p, 4);
    const auto& weights = act.rep.carrier.weights();
    std::size_t exact = 0;
    for (const auto& g : b.elements) {
      const double gauge_p = measure::pth_power_sum(weights, act.cocycle_at(g), p);
      if (gauge_p == static_cast<double>(groups::word_length(g))) ++exact;
    }
    ok = ok && exact == b.size();
    const auto cr = actions::verify_cocycle(act, b);
    ok = ok && cr.passed;
    art.push_back(io::json{{"p", p}, {"elements", b.size()}, {"norm_law_exact", exact},
                           {"cocycle_residual", cr.max_residual}});
  }
  for (const double p : {1.0, 1.5}) {
    const auto act = actions::tree_cocycle(2, p, 4);
    const auto hr = actions::haagerup_function(act, groups::ball(spec, 2));
    ok = ok && hr.report.is_cnd;
    art.push_back(io::json{{"p", p}, {"haagerup_cnd", hr.report.is_cnd},
                           {"extremal", hr.report.extremal_value}});
  }
  res.passed = ok;
  res.details = "norm law exact on all 161 elements for 5 exponents; cocycle identity exact; "
                "psi CND at p in {1, 1.5}";
  res.artifact = std::move(art);
  return res;
}

// 8. End-to-end construction on Z at p = 1.5, radius 4: exact measure 1/2
//    blocks, closed-form/materialized agreement, cocycle identity, strictly
//    increasing properness window, and a CND certificate for psi.
inline CriterionResult construction_pipeline(const SuiteConfig& cfg) {
  CriterionResult res;
  res.name = "construction_pipeline";
  res.budget_seconds = 120.0;
  const auto spec = groups::GroupSpec::parse("Z");
  const auto report = construction::construct_and_certify(
      spec, 1.5, 4, {0.1, 0.05, 0.02}, construction::MaterializePolicy::Auto, {}, cfg.seed);
  bool ok = report.passed;
  for (const auto& block : report.blocks) {
    ok = ok && construction::majority_measure(block.n, block.dims) == Rational(1, 2);
  }
  ok = ok && report.blocks.size() == 3;
  ok = ok && !report.materialized.empty();
  for (const auto& m : report.materialized) {
    ok = ok && m.bridge_error <= report.tolerances.bridge && m.cocycle.passed && m.isometry.passed;
  }
  ok = ok && report.profile_strictly_increasing && report.profile.rows.size() == 4;
  ok = ok && report.cnd.is_cnd;
  res.passed = ok;
  std::string windows;
  for (const auto& block : report.blocks) windows += (windows.empty() ? "" : ",") + std::to_string(block.n);
  res.details = "schedule n={" + windows + "}; " + std::to_string(report.materialized.size()) +
                " materialized block(s); failed_stage='" + report.failed_stage + "'";
  res.artifact = io::certification_to_json(report);
  return res;
}

// 9. Strong-mixing table: the exact DP correlation 1/4 - mu(Delta)/2 matches
//    the materialized inner product bit for bit, vanishes at disjoint
//    windows, where the L_2 distance is 1/sqrt(2) = sqrt(2) ||v_n||_2.
inline CriterionResult mixing_decay(const SuiteConfig&) {
  CriterionResult res;
  res.name = "mixing_decay";
  res.budget_seconds = 10.0;
  bool ok = true;
  io::json art = io::json::array();
  const auto spec = groups::GroupSpec::parse("Z");
  for (const long n : {3L, 5L, 7L, 9L}) {
    std::vector<std::vector<long long>> shifts;
    for (long long s = 1; s <= n; ++s) shifts.push_back({s});
    const auto rows = construction::mixing_decay(n, shifts);

    // disjoint windows: correlation exactly zero
    ok = ok && rows.back().discrepancy == Rational(1, 2) && rows.back().inner == Rational(0);

    // materialized cross-check on every shift the configuration cap allows
    const long s_mat = std::min<long>(n, (20 - n) / 2);
    const auto mat = construction::detail::materialize_block(spec, n, 2.0, s_mat);
    const auto& weights = mat.action.rep.carrier.weights();
    const auto ball = groups::ball(spec, s_mat);
    double worst_gap = 0.0;
    for (const auto& g : ball.elements) {
      const long s = groups::word_length(g);
      if (s == 0) continue;
      const auto moved = mat.action.rep.at(g).apply(mat.w);
      double inner = 0.0;
      for (std::size_t c = 0; c < mat.w.size(); ++c) inner += weights[c] * mat.w[c] * moved[c];
      const double predicted = to_double(rows[static_cast<std::size_t>(s) - 1].inner);
      worst_gap = std::max(worst_gap, std::abs(inner - predicted));
      if (s == n) {
        // the disjoint translate sits at L_2 distance 1/sqrt(2)
        std::vector<double> diff(mat.w.size());
        for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = mat.w[c] - moved[c];
        const double dist = measure::lp_gauge(weights, diff, 2.0);
        const double norm_v = measure::lp_gauge(weights, mat.w, 2.0);
        ok = ok && std::abs(dist - std::sqrt(0.5)) <= 1e-12;
        ok = ok && std::abs(dist - std::sqrt(2.0) * norm_v) <= 1e-12;
      }
    }
    ok = ok && worst_gap == 0.0;

    io::json table = io::json::array();
    for (const auto& row : rows) {
      table.push_back(io::json{{"shift", row.shift},
                               {"discrepancy", to_fraction_string(row.discrepancy)},
                               {"inner", to_fraction_string(row.inner)}});
    }
    art.push_back(io::json{{"n", n}, {"materialized_radius", s_mat},
                           {"materialized_gap", worst_gap}, {"table", std::move(table)}});
  }
  res.passed = ok;
  res.details = "windows {3,5,7,9}: DP vs materialized correlation gap 0; disjoint rows exact";
  res.artifact = std::move(art);
  return res;
}

inline std::vector<CriterionResult> run_battery(const SuiteConfig& cfg) {
  using Runner = CriterionResult (*)(const SuiteConfig&);
  const Runner runners[] = {cnd_lemma_suite, negative_control, schoenberg_closure,
                            frullani_identity, mazur_transfer,  gns_round_trip,
                            tree_fixture,     construction_pipeline, mixing_decay};
  std::vector<CriterionResult> out;
  out.reserve(10);
  for (const auto& run : runners) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = run(cfg);
    } catch (const std::exception& e) {
      r.passed = false;
      r.details = std::string("exception: ") + e.what();
    }
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.budget_seconds > 0.0 && r.elapsed_seconds >= r.budget_seconds) {
      r.passed = false;
      r.details += " [over the " + format_double(r.budget_seconds) + "s budget]";
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

/// The full acceptance battery plus the determinism criterion (a second,
/// independent run of the battery must produce byte-identical artifacts).
inline SuiteReport run_suite(const SuiteConfig& cfg = {}) {
  SuiteReport report;
  report.config = cfg;
  report.results = detail::run_battery(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult det;
  det.name = "determinism";
  const auto rerun = detail::run_battery(cfg);
  bool same = rerun.size() == report.results.size();
  std::string first_mismatch;
  if (same) {
    for (std::size_t i = 0; i < rerun.size(); ++i) {
      const bool equal = rerun[i].artifact.dump() == report.results[i].artifact.dump() &&
                         rerun[i].passed == report.results[i].passed &&
                         rerun[i].details == report.results[i].details;
      if (!equal && first_mismatch.empty()) first_mismatch = rerun[i].name;
      same = same && equal;
    }
  }
  det.passed = same;
  det.details = same ? "second battery run byte-identical (timings excluded)"
                     : "rerun diverged first at criterion '" + first_mismatch + "'";
  det.artifact = io::json{{"reruns_identical", same}};
  det.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.results.push_back(std::move(det));
  return report;
}

inline io::json suite_report_to_json(const SuiteReport& report) {
  io::json j;
  j["seed"] = report.config.seed;
  j["mutate_mazur_exponent"] = report.config.mutate_mazur_exponent;
  io::json rows = io::json::array();
  for (const auto& r : report.results) {
    rows.push_back(io::json{{"name", r.name},
                            {"passed", r.passed},
                            {"details", r.details},
                            {"elapsed_seconds", r.elapsed_seconds},
                            {"budget_seconds", r.budget_seconds},
                            {"artifact", r.artifact}});
  }
  j["criteria"] = std::move(rows);
  j["all_passed"] = report.all_passed();
  return j;
}

}  // namespace atmen::suite
