#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "atmen/defaults.hpp"
#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/kernel.hpp"

namespace atmen::embedding {

/// Finite Hilbert-space realization of a CND kernel: points whose pairwise
/// squared distances reproduce the kernel entries.
struct HilbertEmbedding {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> coordinates;  // one row per label, dimension columns
  std::size_t dimension = 0;                     // eigenvalues above the PSD cutoff
  std::size_t clamped = 0;                       // eigenvalues clamped up to 0
  double gram_residual = 0.0;  // max |  ||x_i - x_j||^2 - K(i,j) |
};

/// Classical multidimensional scaling: factor G = -1/2 P K P. Requires a
/// distance-type kernel (CND, entrywise >= 0, zero diagonal). A kernel that
/// fails the CND test is rejected with the certifying witness.
inline HilbertEmbedding gns_embed(const kernels::Kernel& K, double tol = defaults::kCndTolerance) {
  auto cnd = kernels::cnd_test(K, tol);
  if (!cnd.is_cnd) throw kernels::cnd_rejection(std::move(cnd));

  const auto n = static_cast<Eigen::Index>(K.size());
  const double scale = 1.0 + K.max_abs();
  const double threshold = tol * scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(K.matrix()(i, i)) > threshold) {
      throw input_error("gns_embed requires zero diagonal; violated at " + K.labels()[i]);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (K.matrix()(i, j) < -threshold) {
        throw input_error("gns_embed requires entrywise nonnegative kernel; entry (" +
                          K.labels()[i] + ", " + K.labels()[j] + ") is negative");
      }
    }
  }

  const Eigen::MatrixXd P =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd G = -0.5 * P * K.matrix() * P;
  G = 0.5 * (G + G.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  if (es.info() != Eigen::Success) throw inconsistency_error("eigensolver failed to converge in gns_embed");

  HilbertEmbedding emb;
  emb.labels = K.labels();

  // Eigen returns ascending order; walk from the top for decreasing order.
  std::vector<std::pair<double, Eigen::Index>> kept;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double lambda = es.eigenvalues()[i];
    if (lambda > threshold) {
      kept.emplace_back(lambda, i);
    } else if (lambda >= -threshold) {
      ++emb.clamped;  // clamp to zero: contributes no coordinate
    } else {
      throw inconsistency_error("Gram eigenvalue " + std::to_string(lambda) +
                                " below the clamp window of a kernel that passed the CND test");
    }
  }
  emb.dimension = kept.size();
  emb.coordinates.assign(static_cast<std::size_t>(n), std::vector<double>(emb.dimension, 0.0));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const double root = std::sqrt(kept[j].first);
    const auto col = es.eigenvectors().col(kept[j].second);
    for (Eigen::Index i = 0; i < n; ++i) {
      emb.coordinates[static_cast<std::size_t>(i)][j] = root * col[i];
    }
  }

  double residual = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < emb.dimension; ++d) {
        const double diff = emb.coordinates[static_cast<std::size_t>(i)][d] -
                            emb.coordinates[static_cast<std::size_t>(j)][d];
        d2 += diff * diff;
      }
      residual = std::max(residual, std::abs(d2 - K.matrix()(i, j)));
    }
  }
  emb.gram_residual = residual;
  return emb;
}

struct EscapeRow {
  long radius = 0;
  double min_value = 0.0;
  std::size_t sphere_size = 0;
};

/// Per-radius minimum of psi over spheres: the finite-scale proxy for
/// psi(g) -> infinity. Radii whose sphere is empty (finite factors) are
/// omitted from the table.
inline std::vector<EscapeRow> escape_profile(const kernels::CndFunction& psi,
                                             const std::vector<long>& radii) {
  if (radii.empty()) throw input_error("escape_profile needs at least one radius");
  long max_radius = 0;
  for (long r : radii) {
    if (r < 0) throw input_error("escape radii must be >= 0");
    max_radius = std::max(max_radius, r);
  }
  const auto b = groups::ball(psi.spec, max_radius);
  std::vector<EscapeRow> rows;
  rows.reserve(radii.size());
  for (long r : radii) {
    const auto s = groups::sphere(b, r);
    if (s.empty()) continue;
    EscapeRow row;
    row.radius = r;
    row.sphere_size = s.size();
    row.min_value = psi.value_at(s.front());
    for (const auto& g : s) row.min_value = std::min(row.min_value, psi.value_at(g));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace atmen::embedding
