#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "atmen/defaults.hpp"
#include "atmen/errors.hpp"
#include "atmen/rng.hpp"

namespace atmen::measure {

/// Finite measure space: n atoms with positive masses.
class FiniteMeasureSpace {
 public:
  FiniteMeasureSpace() = default;

  explicit FiniteMeasureSpace(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw input_error("measure space needs at least one atom");
    for (double w : weights_) {
      if (!(w > 0.0)) throw input_error("atom weights must be positive");
    }
  }

  static FiniteMeasureSpace uniform_probability(std::size_t atoms) {
    return FiniteMeasureSpace(std::vector<double>(atoms, 1.0 / static_cast<double>(atoms)));
  }

  static FiniteMeasureSpace counting(std::size_t atoms) {
    return FiniteMeasureSpace(std::vector<double>(atoms, 1.0));
  }

  std::size_t atom_count() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

  double total_mass() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  bool is_probability(double tol = 1e-12) const { return std::abs(total_mass() - 1.0) <= tol; }

  friend bool operator==(const FiniteMeasureSpace&, const FiniteMeasureSpace&) = default;

 private:
  std::vector<double> weights_;
};

/// A vector in the discretized L_p(mu): one value per atom, plus the exponent.
struct LpVector {
  FiniteMeasureSpace space;
  std::vector<double> values;
  double p = 2.0;

  LpVector() = default;
  LpVector(FiniteMeasureSpace s, std::vector<double> v, double exponent)
      : space(std::move(s)), values(std::move(v)), p(exponent) {
    if (values.size() != space.atom_count()) {
      throw input_error("value count " + std::to_string(values.size()) +
                        " does not match atom count " + std::to_string(space.atom_count()));
    }
    if (!(p > 0.0)) throw input_error("exponent p must be positive");
  }
};

/// Which gauge convention applies at a given exponent: the L_p norm for
/// p >= 1, the metric gauge Delta_p (p-th power sum, no root) for 0 < p < 1.
enum class GaugeConvention { Norm, PowerSum };

inline GaugeConvention gauge_convention(double p) {
  return p >= 1.0 ? GaugeConvention::Norm : GaugeConvention::PowerSum;
}

inline std::string gauge_convention_label(double p) {
  return p >= 1.0 ? "norm" : "power_sum";
}

/// Sum of w_i |v_i|^p — the building block of both conventions. The raw
/// overload avoids copying a measure space around hot verification loops.
inline double pth_power_sum(const std::vector<double>& weights, const std::vector<double>& values,
                            double p) {
  if (weights.size() != values.size()) throw input_error("pth_power_sum: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += weights[i] * std::pow(std::abs(values[i]), p);
  }
  return s;
}

inline double pth_power_sum(const LpVector& v) { return pth_power_sum(v.space.weights(), v.values, v.p); }

/// ||v||_p for p >= 1; Delta_p(v) = sum w_i |v_i|^p for 0 < p < 1.
inline double lp_gauge(const std::vector<double>& weights, const std::vector<double>& values,
                       double p) {
  const double s = pth_power_sum(weights, values, p);
  return gauge_convention(p) == GaugeConvention::Norm ? std::pow(s, 1.0 / p) : s;
}

inline double lp_gauge(const LpVector& v) { return lp_gauge(v.space.weights(), v.values, v.p); }

inline void require_same_space(const LpVector& f, const LpVector& g, const char* what) {
  if (!(f.space == g.space)) throw input_error(std::string(what) + ": vectors live on different measure spaces");
}

/// <f, g> = sum w_i f_i g_i. Only meaningful (and only accepted) at p = 2.
inline double inner_product(const LpVector& f, const LpVector& g) {
  require_same_space(f, g, "inner_product");
  if (f.p != 2.0 || g.p != 2.0) throw input_error("inner_product requires p = 2 on both vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    s += f.space.weights()[i] * f.values[i] * g.values[i];
  }
  return s;
}

inline LpVector subtract(const LpVector& f, const LpVector& g) {
  require_same_space(f, g, "subtract");
  if (f.p != g.p) throw input_error("subtract: exponent mismatch");
  std::vector<double> vals(f.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = f.values[i] - g.values[i];
  return LpVector(f.space, std::move(vals), f.p);
}

inline LpVector add(const LpVector& f, const LpVector& g) {
  require_same_space(f, g, "add");
  if (f.p != g.p) throw input_error("add: exponent mismatch");
  std::vector<double> vals(f.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = f.values[i] + g.values[i];
  return LpVector(f.space, std::move(vals), f.p);
}

inline LpVector scale(const LpVector& f, double c) {
  std::vector<double> vals(f.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = c * f.values[i];
  return LpVector(f.space, std::move(vals), f.p);
}

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Mazur map between L_{p_from} and L_{p_to}:
///   (M v)_i = |v_i|^{p_from/p_to} sign(v_i),
/// which transfers the p-th power sum exactly:
///   sum w |Mv|^{p_to} = sum w |v|^{p_from}.
inline LpVector mazur_map(const LpVector& v, double p_from, double p_to) {
  if (!(p_from > 0.0) || !(p_to > 0.0)) throw input_error("mazur_map exponents must be positive");
  const double e = p_from / p_to;
  std::vector<double> vals(v.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    vals[i] = std::pow(std::abs(v.values[i]), e) * sign_of(v.values[i]);
  }
  return LpVector(v.space, std::move(vals), p_to);
}

/// Seeded point on the unit sphere of L_p (gauge = 1 in the convention of p).
inline LpVector random_unit_vector(const FiniteMeasureSpace& space, double p, Rng& rng) {
  std::vector<double> vals(space.atom_count());
  double s = 0.0;
  do {
    for (auto& x : vals) x = rng.normal();
    s = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) s += space.weights()[i] * std::pow(std::abs(vals[i]), p);
  } while (!(s > 0.0));
  // Delta_p(c v) = |c|^p Delta_p(v), so dividing by s^{1/p} lands on the
  // unit sphere in either convention.
  const double c = std::pow(s, 1.0 / p);
  for (auto& x : vals) x /= c;
  return LpVector(space, std::move(vals), p);
}

struct ModulusRow {
  double input_dist = 0.0;
  double output_dist = 0.0;
  double envelope = 0.0;  // running max of output_dist in input_dist order
};

/// Empirical uniform-continuity modulus of the Mazur map between unit
/// spheres, from seeded random pairs. Deterministic given the seed.
struct ModulusTable {
  double p_from = 2.0;
  double p_to = 2.0;
  std::size_t atoms = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<ModulusRow> rows;  // sorted by input_dist

  double max_output_for(double input_cap) const {
    double best = 0.0;
    for (const auto& r : rows) {
      if (r.input_dist <= input_cap) best = std::max(best, r.output_dist);
    }
    return best;
  }
};

inline ModulusTable mazur_modulus_estimate(double p_from, double p_to, std::size_t sample_count,
                                           std::uint64_t seed, std::size_t atoms = 32) {
  if (sample_count < 1) throw input_error("mazur_modulus_estimate needs sample_count >= 1");
  if (!(p_from > 0.0) || !(p_to > 0.0)) throw input_error("exponents must be positive");
  auto space = FiniteMeasureSpace::uniform_probability(atoms);
  Rng rng(seed);
  ModulusTable table;
  table.p_from = p_from;
  table.p_to = p_to;
  table.atoms = atoms;
  table.samples = sample_count;
  table.seed = seed;
  table.rows.reserve(sample_count);
  for (std::size_t k = 0; k < sample_count; ++k) {
    auto u = random_unit_vector(space, p_from, rng);
    auto v = random_unit_vector(space, p_from, rng);
    auto mu = mazur_map(u, p_from, p_to);
    auto mv = mazur_map(v, p_from, p_to);
    ModulusRow row;
    row.input_dist = lp_gauge(subtract(u, v));
    row.output_dist = lp_gauge(subtract(mu, mv));
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ModulusRow& a, const ModulusRow& b) { return a.input_dist < b.input_dist; });
  double run = 0.0;
  for (auto& r : table.rows) {
    run = std::max(run, r.output_dist);
    r.envelope = run;
  }
  return table;
}

}  // namespace atmen::measure
