#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "atmen/defaults.hpp"
#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/kernel.hpp"
#include "atmen/measure.hpp"
#include "atmen/rng.hpp"

namespace atmen::actions {

/// A signed atom permutation: (S v)[target[i]] = sign[i] * v[i]. Weight
/// preservation of the underlying permutation makes S isometric in every
/// L_p at once.
struct SignedPermutation {
  std::vector<std::size_t> target;
  std::vector<std::int8_t> sign;

  static SignedPermutation identity(std::size_t n) {
    SignedPermutation s;
    s.target.resize(n);
    std::iota(s.target.begin(), s.target.end(), std::size_t{0});
    s.sign.assign(n, 1);
    return s;
  }

  std::size_t size() const { return target.size(); }

  bool is_bijection() const {
    std::vector<char> hit(target.size(), 0);
    for (std::size_t t : target) {
      if (t >= target.size() || hit[t]) return false;
      hit[t] = 1;
    }
    return true;
  }

  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[target[i]] = static_cast<double>(sign[i]) * v[i];
    }
    return out;
  }

  /// Composition as functions: compose(a, b) applies b first, then a.
  friend SignedPermutation compose(const SignedPermutation& a, const SignedPermutation& b) {
    SignedPermutation out;
    out.target.resize(b.size());
    out.sign.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
      out.target[i] = a.target[b.target[i]];
      out.sign[i] = static_cast<std::int8_t>(b.sign[i] * a.sign[b.target[i]]);
    }
    return out;
  }

  SignedPermutation inverse() const {
    SignedPermutation out;
    out.target.resize(size());
    out.sign.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      out.target[target[i]] = i;
      out.sign[target[i]] = sign[i];
    }
    return out;
  }

  friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
};

/// A linear isometric representation given by signed permutations on a
/// finite measure space, assigned per ball element (keyed by token).
struct LinearRep {
  groups::GroupSpec spec;
  measure::FiniteMeasureSpace carrier;
  std::unordered_map<std::string, SignedPermutation> assignment;

  const SignedPermutation& at(const groups::GroupElement& g) const {
    const auto token = groups::to_token(g);
    auto it = assignment.find(token);
    if (it == assignment.end()) {
      throw input_error("representation has no assignment at element '" + token + "'");
    }
    return it->second;
  }
};

/// Affine isometric action data Psi(g) v = pi(g) v + gamma(g), with the
/// cocycle stored per ball element.
struct AffineAction {
  LinearRep rep;
  std::unordered_map<std::string, std::vector<double>> cocycle;
  double p = 2.0;

  const std::vector<double>& cocycle_at(const groups::GroupElement& g) const {
    const auto token = groups::to_token(g);
    auto it = cocycle.find(token);
    if (it == cocycle.end()) {
      throw input_error("cocycle has no value at element '" + token + "'");
    }
    return it->second;
  }

  double cocycle_gauge(const groups::GroupElement& g) const {
    return measure::lp_gauge(rep.carrier.weights(), cocycle_at(g), p);
  }
};

/// The coboundary gamma(g) = pi(g) w - w; passes the cocycle identity by
/// telescoping, for any w.
inline AffineAction coboundary_action(LinearRep rep, const std::vector<double>& w, double p,
                                      const groups::Ball& ball) {
  AffineAction action{std::move(rep), {}, p};
  action.cocycle.reserve(ball.size());
  for (const auto& g : ball.elements) {
    auto moved = action.rep.at(g).apply(w);
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] -= w[i];
    action.cocycle.emplace(groups::to_token(g), std::move(moved));
  }
  return action;
}

struct IsometryReport {
  bool passed = false;
  double max_gauge_deviation = 0.0;
  double tolerance = 0.0;
  double p = 2.0;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  std::size_t pairs_checked = 0;
  std::vector<std::string> failures;  // named witnesses, empty when passed
};

/// Checks that the assignment is made of weight-preserving bijections, that
/// gauges of seeded random vectors are preserved by every pi(g) in the ball,
/// and that pi(g)pi(h) = pi(gh) exactly whenever gh stays in the ball.
inline IsometryReport verify_isometry(const LinearRep& rep, double p, const groups::Ball& ball,
                                      double tol = defaults::kIsometryTolerance,
                                      std::uint64_t seed = defaults::kDefaultSeed,
                                      std::size_t sample_count = 6) {
  if (!(rep.spec == ball.spec)) throw input_error("verify_isometry: representation/ball group mismatch");
  IsometryReport report;
  report.tolerance = tol;
  report.p = p;
  report.seed = seed;
  report.sample_count = sample_count;

  const auto& weights = rep.carrier.weights();
  const auto atoms = rep.carrier.atom_count();
  double max_weight = 0.0;
  for (double w : weights) max_weight = std::max(max_weight, w);

  const auto id_token = groups::to_token(groups::identity(ball.spec));
  {
    const auto& pe = rep.at(groups::identity(ball.spec));
    if (!(pe == SignedPermutation::identity(atoms))) {
      report.failures.push_back("pi(e) is not the identity permutation");
    }
  }

  // Structure: bijection + weight preservation, named per element.
  for (const auto& g : ball.elements) {
    const auto& perm = rep.at(g);
    const auto token = groups::to_token(g);
    if (perm.size() != atoms) {
      report.failures.push_back("pi(" + token + ") acts on " + std::to_string(perm.size()) +
                                " atoms, carrier has " + std::to_string(atoms));
      continue;
    }
    if (!perm.is_bijection()) {
      report.failures.push_back("pi(" + token + ") is not a bijection");
      continue;
    }
    for (std::size_t i = 0; i < atoms; ++i) {
      if (std::abs(weights[perm.target[i]] - weights[i]) > tol * (1.0 + max_weight)) {
        report.failures.push_back("pi(" + token + ") moves atom " + std::to_string(i) +
                                  " (weight " + std::to_string(weights[i]) + ") onto weight " +
                                  std::to_string(weights[perm.target[i]]));
        break;
      }
      if (perm.sign[i] != 1 && perm.sign[i] != -1) {
        report.failures.push_back("pi(" + token + ") has invalid sign at atom " + std::to_string(i));
        break;
      }
    }
  }

  // Gauge preservation on seeded unit-gauge vectors.
  Rng rng(seed);
  for (std::size_t s = 0; s < sample_count; ++s) {
    auto v = measure::random_unit_vector(rep.carrier, p, rng);
    const double base = measure::lp_gauge(weights, v.values, p);
    for (const auto& g : ball.elements) {
      const auto& perm = rep.at(g);
      if (perm.size() != atoms || !perm.is_bijection()) continue;  // already reported
      const double moved = measure::lp_gauge(weights, perm.apply(v.values), p);
      const double dev = std::abs(moved - base);
      report.max_gauge_deviation = std::max(report.max_gauge_deviation, dev);
      if (dev > tol) {
        report.failures.push_back("pi(" + groups::to_token(g) + ") changes the gauge of sample " +
                                  std::to_string(s) + " by " + std::to_string(dev));
      }
    }
  }

  // Homomorphism on pairs whose product stays in the ball, exact comparison.
  for (const auto& g : ball.elements) {
    const auto& pg = rep.at(g);
    for (const auto& h : ball.elements) {
      const auto gh = groups::multiply(g, h);
      if (!ball.contains(gh)) continue;
      ++report.pairs_checked;
      if (!(compose(pg, rep.at(h)) == rep.at(gh))) {
        report.failures.push_back("pi(" + groups::to_token(g) + ")pi(" + groups::to_token(h) +
                                  ") != pi(" + groups::to_token(gh) + ")");
      }
    }
  }

  (void)id_token;
  report.passed = report.failures.empty();
  return report;
}

struct CocycleReport {
  bool passed = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::string argmax_g;
  std::string argmax_h;
  std::size_t pairs_checked = 0;
};

/// Max over pairs (g, h) with gh in the ball of
///   gauge( gamma(gh) - pi(g) gamma(h) - gamma(g) ).
/// Pairs are only tested when the product stays inside the ball; missing
/// cocycle or representation values are a domain error, not a failure.
inline CocycleReport verify_cocycle(const AffineAction& action, const groups::Ball& ball,
                                    double tol = defaults::kCocycleTolerance) {
  if (!(action.rep.spec == ball.spec)) throw input_error("verify_cocycle: action/ball group mismatch");
  CocycleReport report;
  report.tolerance = tol;

  const auto& weights = action.rep.carrier.weights();
  {
    const auto& gamma_e = action.cocycle_at(groups::identity(ball.spec));
    const double g0 = measure::lp_gauge(weights, gamma_e, action.p);
    if (g0 > report.max_residual) {
      report.max_residual = g0;
      report.argmax_g = report.argmax_h = groups::to_token(groups::identity(ball.spec));
    }
  }

  for (const auto& g : ball.elements) {
    const auto& pg = action.rep.at(g);
    const auto& gamma_g = action.cocycle_at(g);
    for (const auto& h : ball.elements) {
      const auto gh = groups::multiply(g, h);
      if (!ball.contains(gh)) continue;
      ++report.pairs_checked;
      const auto& gamma_h = action.cocycle_at(h);
      const auto& gamma_gh = action.cocycle_at(gh);
      auto moved = pg.apply(gamma_h);
      for (std::size_t i = 0; i < moved.size(); ++i) {
        moved[i] = gamma_gh[i] - moved[i] - gamma_g[i];
      }
      const double res = measure::lp_gauge(weights, moved, action.p);
      if (res > report.max_residual) {
        report.max_residual = res;
        report.argmax_g = groups::to_token(g);
        report.argmax_h = groups::to_token(h);
      }
    }
  }
  report.passed = report.max_residual <= tol;
  return report;
}

/// Standard fixture: the free group F_k acting on the oriented edges of its
/// Cayley tree, gamma(g) = signed indicator chain of the geodesic from e
/// to g, so that ||gamma(g)||_p^p = word_length(g) exactly.
///
/// Carrier atoms are the edges {u, u s_i} of the vertex ball of radius
/// radius+1, oriented away from u. pi is built on the generators as left
/// translation wherever the translated edge stays inside the carrier;
/// edges pushed off the ball are matched with the uncovered ones in index
/// order (unit weights make any completion weight-preserving), and
/// pi(s^{-1}) is defined as pi(s)^{-1} so that composing along reduced
/// words gives an exact homomorphism. Translation is faithful on every
/// edge a cocycle-identity check can reach: all intermediate translates of
/// geodesic edges have endpoints of length <= radius, and one further
/// generator step stays inside the radius+1 carrier.
inline AffineAction tree_cocycle(long rank, double p, long radius,
                                 std::size_t cap = defaults::kBallCap) {
  if (rank < 1) throw input_error("tree_cocycle requires rank >= 1");
  if (radius < 0) throw input_error("tree_cocycle requires radius >= 0");
  const auto spec = groups::GroupSpec({{groups::FactorKind::Free, rank}});
  const auto vertices = groups::ball(spec, radius + 1, cap);
  const auto domain = groups::ball(spec, radius, cap);

  // Atom table: edge (u, u s_i) indexed by vertex slot and generator.
  const std::size_t k = static_cast<std::size_t>(rank);
  std::vector<long> atom_of(vertices.size() * k, -1);
  std::vector<std::pair<std::size_t, std::size_t>> atoms;  // (vertex slot, generator-1)
  auto letter_element = [&](std::int32_t letter) {
    return groups::GroupElement(spec, {groups::FreeWord{{letter}}});
  };
  for (std::size_t vi = 0; vi < vertices.size(); ++vi) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto head =
          groups::multiply(vertices.elements[vi], letter_element(static_cast<std::int32_t>(i + 1)));
      if (vertices.contains(head)) {
        atom_of[vi * k + i] = static_cast<long>(atoms.size());
        atoms.emplace_back(vi, i);
      }
    }
  }
  const std::size_t atom_count = atoms.size();

  auto edge_atom = [&](const groups::GroupElement& tail, std::size_t i) -> long {
    const auto slot = vertices.find(tail);
    if (!slot) return -1;
    return atom_of[*slot * k + i];
  };

  // Generator permutations: true left translation where the image edge
  // stays inside the carrier, completed by an index-ordered matching.
  std::vector<SignedPermutation> gen_perm(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& perm = gen_perm[i];
    perm.target.assign(atom_count, static_cast<std::size_t>(-1));
    perm.sign.assign(atom_count, 1);
    std::vector<char> covered(atom_count, 0);
    std::vector<std::size_t> leaked;
    const auto s = letter_element(static_cast<std::int32_t>(i + 1));
    for (std::size_t a = 0; a < atom_count; ++a) {
      const auto& [vi, j] = atoms[a];
      const auto tail = groups::multiply(s, vertices.elements[vi]);
      const long image = edge_atom(tail, j);
      // The head s u s_j is in the carrier exactly when the atom exists.
      if (image >= 0) {
        perm.target[a] = static_cast<std::size_t>(image);
        covered[static_cast<std::size_t>(image)] = 1;
      } else {
        leaked.push_back(a);
      }
    }
    std::size_t next_free = 0;
    for (std::size_t a : leaked) {
      while (covered[next_free]) ++next_free;
      perm.target[a] = next_free;
      covered[next_free] = 1;
    }
  }

  LinearRep rep{spec, measure::FiniteMeasureSpace::counting(atom_count), {}};
  rep.assignment.reserve(domain.size());
  for (const auto& g : domain.elements) {
    auto perm = SignedPermutation::identity(atom_count);
    for (auto letter : std::get<groups::FreeWord>(g.parts()[0]).letters) {
      const std::size_t i = static_cast<std::size_t>(letter > 0 ? letter : -letter) - 1;
      perm = compose(perm, letter > 0 ? gen_perm[i] : gen_perm[i].inverse());
    }
    rep.assignment.emplace(groups::to_token(g), std::move(perm));
  }

  AffineAction action{std::move(rep), {}, p};
  action.cocycle.reserve(domain.size());
  for (const auto& g : domain.elements) {
    std::vector<double> chain(atom_count, 0.0);
    auto cur = groups::identity(spec);
    for (auto letter : std::get<groups::FreeWord>(g.parts()[0]).letters) {
      const auto next = groups::multiply(cur, letter_element(letter));
      const std::size_t i = static_cast<std::size_t>(letter > 0 ? letter : -letter) - 1;
      const long a = letter > 0 ? edge_atom(cur, i) : edge_atom(next, i);
      if (a < 0) throw inconsistency_error("geodesic edge missing from the tree carrier");
      chain[static_cast<std::size_t>(a)] += letter > 0 ? 1.0 : -1.0;
      cur = next;
    }
    action.cocycle.emplace(groups::to_token(g), std::move(chain));
  }
  return action;
}

struct PropernessRow {
  long radius = 0;
  double min_gauge = 0.0;
  std::size_t sphere_size = 0;
};

struct PropernessProfile {
  std::vector<PropernessRow> rows;
  std::string convention;  // "norm" or "power_sum", per the action's p
  double p = 2.0;

  bool strictly_increasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (!(rows[i].min_gauge > rows[i - 1].min_gauge)) return false;
    }
    return !rows.empty();
  }
};

/// Per-radius minimum of gauge(gamma(g)) over spheres 1..max_radius — the
/// finite-window properness proxy.
inline PropernessProfile properness_profile(const AffineAction& action, long max_radius,
                                            std::size_t cap = defaults::kBallCap) {
  if (max_radius < 1) throw input_error("properness_profile requires max_radius >= 1");
  const auto b = groups::ball(action.rep.spec, max_radius, cap);
  PropernessProfile profile;
  profile.convention = measure::gauge_convention_label(action.p);
  profile.p = action.p;
  for (long r = 1; r <= max_radius; ++r) {
    const auto s = groups::sphere(b, r);
    if (s.empty()) continue;
    PropernessRow row;
    row.radius = r;
    row.sphere_size = s.size();
    row.min_gauge = action.cocycle_gauge(s.front());
    for (const auto& g : s) row.min_gauge = std::min(row.min_gauge, action.cocycle_gauge(g));
    profile.rows.push_back(row);
  }
  return profile;
}

struct HaagerupResult {
  kernels::CndFunction psi;
  kernels::Kernel kernel;
  kernels::CndReport report;
};

/// psi(g) = ||gamma(g)||^p (the p-th power sum in both gauge conventions),
/// induced kernel K(g,h) = psi(gh^{-1}), and its CND test. The cocycle must
/// cover the ball of twice the kernel radius.
inline HaagerupResult haagerup_function(const AffineAction& action, const groups::Ball& ball,
                                        double tol = defaults::kCndTolerance) {
  if (!(action.p > 0.0 && action.p < 2.0)) {
    throw input_error("haagerup_function requires exponent p in (0,2); got " +
                      std::to_string(action.p));
  }
  HaagerupResult out;
  out.psi.spec = action.rep.spec;
  out.psi.values.reserve(action.cocycle.size());
  const auto& weights = action.rep.carrier.weights();
  for (const auto& [token, gamma] : action.cocycle) {
    out.psi.values.emplace(token, measure::pth_power_sum(weights, gamma, action.p));
  }
  out.kernel = kernels::function_to_kernel(out.psi, ball);
  out.report = kernels::cnd_test(out.kernel, tol);
  return out;
}

}  // namespace atmen::actions
