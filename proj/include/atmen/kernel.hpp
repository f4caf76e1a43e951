#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "atmen/defaults.hpp"
#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/measure.hpp"
#include "atmen/rng.hpp"

namespace atmen::kernels {

/// Symmetric kernel on a finite labeled point set.
class Kernel {
 public:
  Kernel() = default;

  Kernel(std::vector<std::string> labels, Eigen::MatrixXd matrix)
      : labels_(std::move(labels)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) throw input_error("kernel matrix must be square");
    if (static_cast<std::size_t>(matrix_.rows()) != labels_.size()) {
      throw input_error("kernel has " + std::to_string(labels_.size()) + " labels for a " +
                        std::to_string(matrix_.rows()) + "x" + std::to_string(matrix_.cols()) +
                        " matrix");
    }
    if (matrix_.rows() == 0) throw input_error("kernel needs at least one point");
    const double tol = defaults::kSymmetryTolerance * (1.0 + max_abs());
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < matrix_.cols(); ++j) {
        if (std::abs(matrix_(i, j) - matrix_(j, i)) > tol) {
          throw input_error("kernel is not symmetric at (" + labels_[i] + ", " + labels_[j] + ")");
        }
      }
    }
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  double max_abs() const { return matrix_.size() ? matrix_.cwiseAbs().maxCoeff() : 0.0; }

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd matrix_;
};

/// Outcome of the conditional-negative-definiteness test: the maximum of
/// c^T K c over unit mean-zero c, with the attaining witness.
struct CndReport {
  bool is_cnd = false;
  double extremal_value = 0.0;       // c^T K c at the witness, evaluated directly
  std::vector<double> witness;       // mean-zero, unit Euclidean length (n >= 2)
  double relative_tolerance = 0.0;   // the tol argument
  double tolerance_used = 0.0;       // tol * (1 + max|K|), the decision threshold
  double eigensolver_residual = 0.0; // ||M v - lambda v|| for the chosen eigenpair

  std::string verdict() const { return is_cnd ? "CND" : "not-CND"; }
};

/// Thrown when an operation requires a CND kernel and the test refuses;
/// carries the certifying witness.
class cnd_rejection : public std::runtime_error {
 public:
  explicit cnd_rejection(CndReport r)
      : std::runtime_error("kernel is not conditionally negative definite (extremal value " +
                           std::to_string(r.extremal_value) + " above threshold " +
                           std::to_string(r.tolerance_used) + ")"),
        report(std::move(r)) {}

  CndReport report;
};

/// Largest value of c^T K c over unit vectors with sum(c) = 0, via the
/// spectrum of P K P with P = I - J/n. The all-ones direction is an exact
/// eigenvector of P K P at eigenvalue 0, so eigenvectors are walked from
/// the top and skipped while their mean-zero projection is negligible.
inline CndReport cnd_test(const Kernel& K, double tol = defaults::kCndTolerance) {
  if (!(tol > 0.0)) throw input_error("cnd_test tolerance must be positive");
  const auto n = static_cast<Eigen::Index>(K.size());
  CndReport report;
  report.relative_tolerance = tol;
  report.tolerance_used = tol * (1.0 + K.max_abs());

  if (n == 1) {
    // No nonzero mean-zero vector exists; the defining inequality is vacuous.
    report.is_cnd = true;
    report.witness = {0.0};
    return report;
  }

  const Eigen::MatrixXd P =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd M = P * K.matrix() * P;
  M = 0.5 * (M + M.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw inconsistency_error("eigensolver failed to converge in cnd_test");

  for (Eigen::Index i = n - 1; i >= 0; --i) {
    Eigen::VectorXd c = es.eigenvectors().col(i);
    c.array() -= c.mean();
    const double norm = c.norm();
    if (norm <= 1e-8) continue;  // ones-direction artifact
    c /= norm;
    report.extremal_value = c.dot(K.matrix() * c);
    report.eigensolver_residual =
        (M * es.eigenvectors().col(i) - es.eigenvalues()[i] * es.eigenvectors().col(i)).norm();
    report.witness.assign(c.data(), c.data() + n);
    report.is_cnd = report.extremal_value <= report.tolerance_used;
    return report;
  }
  throw inconsistency_error("cnd_test found no mean-zero eigendirection");
}

/// A symmetric function on a group ball, psi(g) = psi(g^{-1}), keyed by
/// element token.
struct CndFunction {
  groups::GroupSpec spec;
  std::unordered_map<std::string, double> values;

  double value_at(const groups::GroupElement& g) const {
    const auto token = groups::to_token(g);
    auto it = values.find(token);
    if (it == values.end()) {
      throw input_error("function has no value at element '" + token + "'");
    }
    return it->second;
  }

  /// psi(g) = psi(g^{-1}) within tol and psi(e) >= 0, over every key.
  void check_symmetry(double tol = defaults::kSymmetryTolerance) const {
    const auto e_token = groups::to_token(groups::identity(spec));
    auto it = values.find(e_token);
    if (it != values.end() && it->second < -tol) {
      throw input_error("function is negative at the identity");
    }
    for (const auto& [token, value] : values) {
      const auto g = groups::parse_element(spec, token);
      const auto inv_token = groups::to_token(groups::inverse(g));
      auto jt = values.find(inv_token);
      if (jt == values.end()) {
        throw input_error("function defined at '" + token + "' but not at its inverse '" +
                          inv_token + "'");
      }
      if (std::abs(value - jt->second) > tol * (1.0 + std::abs(value))) {
        throw input_error("function is not inverse-symmetric at '" + token + "'");
      }
    }
  }
};

/// K(g, h) = psi(g h^{-1}) on the given ball. Requires psi on the ball of
/// twice the radius so every product stays inside the domain.
inline Kernel function_to_kernel(const CndFunction& psi, const groups::Ball& ball) {
  if (!(psi.spec == ball.spec)) {
    throw input_error("function on " + psi.spec.to_string() + " cannot induce a kernel on a " +
                      ball.spec.to_string() + " ball");
  }
  const auto n = static_cast<Eigen::Index>(ball.size());
  std::vector<std::string> labels;
  labels.reserve(ball.size());
  for (const auto& g : ball.elements) labels.push_back(groups::to_token(g));

  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto gh_inv = groups::multiply(ball.elements[i], groups::inverse(ball.elements[j]));
      m(i, j) = psi.value_at(gh_inv);
    }
  }
  return Kernel(std::move(labels), std::move(m));
}

/// The word-length function on a ball, the basic escape-to-infinity fixture.
inline CndFunction word_length_function(const groups::Ball& ball) {
  CndFunction psi{ball.spec, {}};
  psi.values.reserve(ball.size());
  for (const auto& g : ball.elements) {
    psi.values.emplace(groups::to_token(g), static_cast<double>(groups::word_length(g)));
  }
  return psi;
}

/// Entrywise K^alpha for 0 < alpha < 1 (Schoenberg power transform).
/// alpha = 1 is accepted only with the explicit identity flag.
inline Kernel power_transform(const Kernel& K, double alpha, bool allow_identity = false) {
  if (allow_identity && alpha == 1.0) return K;
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw input_error("power transform exponent must lie in (0,1); got " + std::to_string(alpha));
  }
  Eigen::MatrixXd m(K.matrix().rows(), K.matrix().cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = K.matrix()(i, j);
      if (v < 0.0) {
        throw input_error("power transform requires entrywise nonnegative kernel; entry (" +
                          K.labels()[i] + ", " + K.labels()[j] + ") is negative");
      }
      m(i, j) = std::pow(v, alpha);
    }
  }
  return Kernel(K.labels(), std::move(m));
}

/// Per-t report for the Schoenberg pair: 1 - e^{-tK} must be CND and
/// e^{-tK} must be positive semidefinite.
struct ExpKernelReport {
  double t = 0.0;
  CndReport shifted;         // cnd_test of 1 - e^{-tK}
  double exp_min_eigenvalue = 0.0;
  double psd_threshold = 0.0;  // -tol * (1 + max|e^{-tK}|)
  bool exp_psd = false;
  bool passed = false;
};

inline std::vector<ExpKernelReport> exp_kernel_test(const Kernel& K,
                                                    const std::vector<double>& t_grid,
                                                    double tol = defaults::kCndTolerance) {
  std::vector<ExpKernelReport> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0.0)) throw input_error("exp_kernel_test requires t > 0");
    Eigen::MatrixXd exp_m = (-t * K.matrix().array()).exp().matrix();
    Eigen::MatrixXd shifted_m = Eigen::MatrixXd::Constant(exp_m.rows(), exp_m.cols(), 1.0) - exp_m;

    ExpKernelReport r;
    r.t = t;
    r.shifted = cnd_test(Kernel(K.labels(), shifted_m), tol);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (exp_m + exp_m.transpose()));
    if (es.info() != Eigen::Success) {
      throw inconsistency_error("eigensolver failed to converge in exp_kernel_test");
    }
    r.exp_min_eigenvalue = es.eigenvalues().minCoeff();
    r.psd_threshold = -tol * (1.0 + exp_m.cwiseAbs().maxCoeff());
    r.exp_psd = r.exp_min_eigenvalue >= r.psd_threshold;
    r.passed = r.shifted.is_cnd && r.exp_psd;
    out.push_back(std::move(r));
  }
  return out;
}

inline ExpKernelReport exp_kernel_test(const Kernel& K, double t,
                                       double tol = defaults::kCndTolerance) {
  return exp_kernel_test(K, std::vector<double>{t}, tol).front();
}

struct QuadratureConfig {
  double eps = defaults::kQuadEps;           // lower cut of the t-integral
  double t_max_over_x = defaults::kQuadTMaxOverX;  // upper cut T = t_max_over_x / x
  std::size_t nodes = defaults::kQuadNodes;  // Simpson subintervals (rounded up to even)
};

/// x^alpha via the Frullani-type identity
///   x^alpha = c_alpha * Int_0^inf (1 - e^{-tx}) t^{-alpha-1} dt,
/// with c_alpha = alpha / Gamma(1 - alpha). Composite Simpson after the
/// substitution t = e^u on [eps, T], closed-form head (integrand ~ x t^{-alpha})
/// and tail (integrand ~ t^{-alpha-1}) corrections outside the cut.
inline double frullani_power(double x, double alpha, const QuadratureConfig& quad = {}) {
  if (!(x > 0.0)) throw input_error("frullani_power requires x > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("frullani_power requires alpha in (0,1)");
  if (quad.nodes < 2 || !(quad.eps > 0.0) || !(quad.t_max_over_x > 0.0)) {
    throw input_error("bad quadrature config");
  }
  const double c_alpha = alpha / std::tgamma(1.0 - alpha);
  const double T = quad.t_max_over_x / x;
  if (T <= quad.eps) throw input_error("quadrature window is empty (T <= eps)");

  const double a = std::log(quad.eps);
  const double b = std::log(T);
  std::size_t n = quad.nodes;
  if (n % 2 == 1) ++n;
  const double h = (b - a) / static_cast<double>(n);
  auto f = [&](double u) { return (1.0 - std::exp(-x * std::exp(u))) * std::exp(-alpha * u); };
  double acc = f(a) + f(b);
  for (std::size_t k = 1; k < n; ++k) {
    acc += f(a + h * static_cast<double>(k)) * (k % 2 == 1 ? 4.0 : 2.0);
  }
  const double body = acc * h / 3.0;
  const double head = x * std::pow(quad.eps, 1.0 - alpha) / (1.0 - alpha);
  const double tail = std::pow(T, -alpha) / alpha;
  return c_alpha * (body + head + tail);
}

/// Squared Euclidean distances of n seeded random points — always CND.
inline Kernel random_cnd_kernel(std::size_t n, std::size_t dim, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw input_error("random_cnd_kernel requires n, dim >= 1");
  Rng rng(seed);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& c : p) c = rng.normal();
  }
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pts[i][d] - pts[j][d];
        s += diff * diff;
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
    }
  }
  return Kernel(std::move(labels), std::move(m));
}

/// K(x, y) = sum_i w_i |x_i - y_i|^p over a finite L_p point set.  This is
/// gauge(x-y)^p for p >= 1 and the gauge itself for 0 < p < 1, i.e. the
/// canonical candidate kernel in both gauge regimes.
inline Kernel lp_distance_kernel(const std::vector<measure::LpVector>& points, double p) {
  if (points.empty()) throw input_error("lp_distance_kernel needs at least one point");
  for (const auto& pt : points) {
    if (pt.p != p) throw input_error("lp_distance_kernel: point exponent does not match p");
  }
  const auto n = points.size();
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = measure::pth_power_sum(measure::subtract(points[i], points[j]));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
    }
  }
  return Kernel(std::move(labels), std::move(m));
}

}  // namespace atmen::kernels
