#pragma once

#include <cstddef>

namespace atmen::defaults {

// Tolerances. Relative tolerances are applied as tol * (1 + max|K|).
inline constexpr double kCndTolerance = 1e-9;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kCocycleTolerance = 1e-12;
inline constexpr double kIsometryTolerance = 1e-12;
inline constexpr double kGnsResidualTarget = 1e-8;

// Enumeration and materialization caps.
inline constexpr std::size_t kBallCap = 200000;
inline constexpr std::size_t kMaterializeConfigCap = std::size_t{1} << 20;
inline constexpr long kMaterializeMaxWindow = 9;
inline constexpr long kMaxScheduleWindow = 20001;
inline constexpr long long kMaxWindowAtoms = 200001;  // cells in one majority window
inline constexpr std::size_t kEscapeScanCap = 10000;  // distinct shift profiles per escape scan

// Frullani quadrature: integrate on [eps, T] with T = t_max_over_x / x,
// composite Simpson after the substitution t = e^u, plus closed-form
// head and tail corrections.
inline constexpr double kQuadEps = 1e-8;
inline constexpr double kQuadTMaxOverX = 200.0;
inline constexpr std::size_t kQuadNodes = 20000;

inline constexpr unsigned long long kDefaultSeed = 20240901ull;

}  // namespace atmen::defaults
