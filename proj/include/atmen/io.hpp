#pragma once

#include <json.hpp>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "atmen/action.hpp"
#include "atmen/construction.hpp"
#include "atmen/defaults.hpp"
#include "atmen/embedding.hpp"
#include "atmen/errors.hpp"
#include "atmen/kernel.hpp"
#include "atmen/measure.hpp"
#include "atmen/rational.hpp"

namespace atmen::io {

using json = nlohmann::ordered_json;

// ---- files --------------------------------------------------------------------

/// Write-then-rename: a partial file never lands under the final name.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / (path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw resource_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw resource_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw resource_error("cannot move report into place at '" + path.string() + "': " + ec.message());
  }
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json load_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

// ---- kernels --------------------------------------------------------------------

inline json kernel_to_json(const kernels::Kernel& K) {
  json j;
  j["labels"] = K.labels();
  json rows = json::array();
  for (Eigen::Index i = 0; i < K.matrix().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < K.matrix().cols(); ++c) row.push_back(K.matrix()(i, c));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j;
}

inline kernels::Kernel kernel_from_json(const json& j) {
  if (!j.contains("matrix") || !j["matrix"].is_array()) {
    throw input_error("kernel JSON needs a \"matrix\" array");
  }
  const auto& rows = j["matrix"];
  const auto n = rows.size();
  if (n == 0) throw input_error("kernel matrix is empty");
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n) {
      throw input_error("kernel matrix must be square; row " + std::to_string(i) + " has " +
                        std::to_string(rows[i].size()) + " entries for " + std::to_string(n) +
                        " rows");
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!rows[i][c].is_number()) throw input_error("kernel matrix entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c].get<double>();
    }
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    if (!j["labels"].is_array() || j["labels"].size() != n) {
      throw input_error("kernel \"labels\" must list one name per row");
    }
    for (const auto& l : j["labels"]) labels.push_back(l.get<std::string>());
  } else {
    for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
  }
  return kernels::Kernel(std::move(labels), std::move(m));
}

inline json cnd_report_to_json(const kernels::CndReport& r) {
  json j;
  j["verdict"] = r.verdict();
  j["extremal_value"] = r.extremal_value;
  j["witness"] = r.witness;
  j["relative_tolerance"] = r.relative_tolerance;
  j["tolerance_used"] = r.tolerance_used;
  j["eigensolver_residual"] = r.eigensolver_residual;
  return j;
}

// ---- vectors ----------------------------------------------------------------------

inline json lp_vector_to_json(const measure::LpVector& v) {
  json j;
  j["weights"] = v.space.weights();
  j["values"] = v.values;
  j["p"] = v.p;
  return j;
}

inline measure::LpVector lp_vector_from_json(const json& j) {
  for (const char* key : {"weights", "values", "p"}) {
    if (!j.contains(key)) throw input_error(std::string("vector JSON needs \"") + key + "\"");
  }
  return measure::LpVector(measure::FiniteMeasureSpace(j["weights"].get<std::vector<double>>()),
                           j["values"].get<std::vector<double>>(), j["p"].get<double>());
}

inline std::string modulus_table_csv(const measure::ModulusTable& t) {
  std::ostringstream out;
  out << "input_dist,output_dist\n";
  out.precision(17);
  for (const auto& r : t.rows) out << r.input_dist << "," << r.output_dist << "\n";
  return out.str();
}

inline json modulus_table_to_json(const measure::ModulusTable& t) {
  json j;
  j["p_from"] = t.p_from;
  j["p_to"] = t.p_to;
  j["atoms"] = t.atoms;
  j["samples"] = t.samples;
  j["seed"] = t.seed;
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back(json{{"input_dist", r.input_dist},
                        {"output_dist", r.output_dist},
                        {"envelope", r.envelope}});
  }
  j["rows"] = std::move(rows);
  return j;
}

// ---- embeddings ---------------------------------------------------------------------

inline json embedding_to_json(const embedding::HilbertEmbedding& e) {
  json j;
  j["labels"] = e.labels;
  j["coordinates"] = e.coordinates;
  j["dimension"] = e.dimension;
  j["clamped_eigenvalues"] = e.clamped;
  j["gram_residual"] = e.gram_residual;
  return j;
}

inline std::string escape_profile_csv(const std::vector<embedding::EscapeRow>& rows) {
  std::ostringstream out;
  out << "radius,min_psi,sphere_size\n";
  out.precision(17);
  for (const auto& r : rows) out << r.radius << "," << r.min_value << "," << r.sphere_size << "\n";
  return out.str();
}

inline json escape_profile_to_json(const std::vector<embedding::EscapeRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back(json{{"radius", r.radius}, {"min_psi", r.min_value}, {"sphere_size", r.sphere_size}});
  }
  return arr;
}

// ---- actions ----------------------------------------------------------------------

inline json action_to_json(const actions::AffineAction& a) {
  json j;
  j["group"] = a.rep.spec.to_string();
  j["p"] = a.p;
  j["weights"] = a.rep.carrier.weights();
  json assign = json::object();
  for (const auto& [token, perm] : a.rep.assignment) {
    json targets = json::array();
    for (auto t : perm.target) targets.push_back(t);
    json signs = json::array();
    for (auto s : perm.sign) signs.push_back(static_cast<int>(s));
    assign[token] = json{{"target", std::move(targets)}, {"sign", std::move(signs)}};
  }
  j["assignment"] = std::move(assign);
  json coc = json::object();
  for (const auto& [token, vec] : a.cocycle) coc[token] = vec;
  j["cocycle"] = std::move(coc);
  return j;
}

inline actions::AffineAction action_from_json(const json& j) {
  for (const char* key : {"group", "p", "weights", "assignment", "cocycle"}) {
    if (!j.contains(key)) throw input_error(std::string("action JSON needs \"") + key + "\"");
  }
  actions::AffineAction a;
  a.rep.spec = groups::GroupSpec::parse(j["group"].get<std::string>());
  a.p = j["p"].get<double>();
  a.rep.carrier = measure::FiniteMeasureSpace(j["weights"].get<std::vector<double>>());
  const auto atoms = a.rep.carrier.atom_count();
  for (const auto& [token, pj] : j["assignment"].items()) {
    actions::SignedPermutation perm;
    perm.target = pj["target"].get<std::vector<std::size_t>>();
    for (int s : pj["sign"].get<std::vector<int>>()) {
      if (s != 1 && s != -1) throw input_error("permutation signs must be +-1 in '" + token + "'");
      perm.sign.push_back(static_cast<std::int8_t>(s));
    }
    if (perm.target.size() != atoms || perm.sign.size() != atoms) {
      throw input_error("permutation at '" + token + "' does not match the carrier size");
    }
    a.rep.assignment.emplace(token, std::move(perm));
  }
  for (const auto& [token, vj] : j["cocycle"].items()) {
    auto vec = vj.get<std::vector<double>>();
    if (vec.size() != atoms) {
      throw input_error("cocycle vector at '" + token + "' does not match the carrier size");
    }
    a.cocycle.emplace(token, std::move(vec));
  }
  return a;
}

inline json isometry_report_to_json(const actions::IsometryReport& r) {
  json j;
  j["passed"] = r.passed;
  j["max_gauge_deviation"] = r.max_gauge_deviation;
  j["tolerance"] = r.tolerance;
  j["p"] = r.p;
  j["seed"] = r.seed;
  j["sample_count"] = r.sample_count;
  j["pairs_checked"] = r.pairs_checked;
  j["failures"] = r.failures;
  return j;
}

inline json cocycle_report_to_json(const actions::CocycleReport& r) {
  json j;
  j["passed"] = r.passed;
  j["max_residual"] = r.max_residual;
  j["tolerance"] = r.tolerance;
  j["argmax_g"] = r.argmax_g;
  j["argmax_h"] = r.argmax_h;
  j["pairs_checked"] = r.pairs_checked;
  return j;
}

inline json properness_profile_to_json(const actions::PropernessProfile& p) {
  json j;
  j["convention"] = p.convention;
  j["p"] = p.p;
  json rows = json::array();
  for (const auto& r : p.rows) {
    rows.push_back(json{{"radius", r.radius}, {"min_gauge", r.min_gauge}, {"sphere_size", r.sphere_size}});
  }
  j["rows"] = std::move(rows);
  j["strictly_increasing"] = p.strictly_increasing();
  return j;
}

inline std::string properness_profile_csv(const actions::PropernessProfile& p) {
  std::ostringstream out;
  out << "radius,min_gauge\n";
  out.precision(17);
  for (const auto& r : p.rows) out << r.radius << "," << r.min_gauge << "\n";
  return out.str();
}

// ---- construction -------------------------------------------------------------------

inline json block_to_json(const construction::BlockData& b) {
  json j;
  j["n"] = b.n;
  j["p"] = b.p;
  j["dims"] = b.dims;
  j["delta"] = b.delta;
  j["escape_radius"] = b.escape_radius;
  j["near_invariance"] = b.near_invariance;
  j["calibration_radius"] = b.calibration_radius;
  json table = json::object();
  for (const auto& [token, q] : b.discrepancies) table[token] = to_fraction_string(q);
  j["discrepancies"] = std::move(table);
  return j;
}

inline json mixing_rows_to_json(const std::vector<construction::MixingRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back(json{{"shift", r.shift},
                       {"discrepancy", to_fraction_string(r.discrepancy)},
                       {"inner_product", to_fraction_string(r.inner)}});
  }
  return arr;
}

inline json certification_to_json(const construction::CertificationReport& r) {
  json j;
  j["group"] = r.group;
  j["p"] = r.p;
  j["radius"] = r.radius;
  j["eps"] = r.eps;
  j["p_outside_theorem_range"] = r.p_outside_theorem_range;
  json blocks = json::array();
  for (const auto& b : r.blocks) blocks.push_back(block_to_json(b));
  j["blocks"] = std::move(blocks);
  json mats = json::array();
  for (const auto& m : r.materialized) {
    mats.push_back(json{{"n", m.n},
                        {"torus_side", m.torus_side},
                        {"configurations", m.configs},
                        {"isometry", isometry_report_to_json(m.isometry)},
                        {"cocycle", cocycle_report_to_json(m.cocycle)},
                        {"bridge_error", m.bridge_error}});
  }
  j["materialized"] = std::move(mats);
  j["properness"] = properness_profile_to_json(r.profile);
  j["cnd"] = cnd_report_to_json(r.cnd);
  j["tolerances"] = json{{"cnd", r.tolerances.cnd},
                         {"cocycle", r.tolerances.cocycle},
                         {"isometry", r.tolerances.isometry},
                         {"bridge", r.tolerances.bridge}};
  j["isometry_seed"] = r.isometry_seed;
  j["passed"] = r.passed;
  j["failed_stage"] = r.failed_stage;
  j["diagnostic"] = r.diagnostic;
  return j;
}

// ---- report envelope -------------------------------------------------------------------

inline json defaults_to_json() {
  json j;
  j["cnd_tolerance"] = defaults::kCndTolerance;
  j["symmetry_tolerance"] = defaults::kSymmetryTolerance;
  j["cocycle_tolerance"] = defaults::kCocycleTolerance;
  j["isometry_tolerance"] = defaults::kIsometryTolerance;
  j["gns_residual_target"] = defaults::kGnsResidualTarget;
  j["ball_cap"] = defaults::kBallCap;
  j["materialize_config_cap"] = defaults::kMaterializeConfigCap;
  j["materialize_max_window"] = defaults::kMaterializeMaxWindow;
  j["max_schedule_window"] = defaults::kMaxScheduleWindow;
  j["max_window_atoms"] = defaults::kMaxWindowAtoms;
  j["quad_eps"] = defaults::kQuadEps;
  j["quad_t_max_over_x"] = defaults::kQuadTMaxOverX;
  j["quad_nodes"] = defaults::kQuadNodes;
  j["default_seed"] = defaults::kDefaultSeed;
  return j;
}

/// Standard report envelope: every run echoes its full configuration and the
/// pinned defaults, so the exact computation can be reproduced from the file.
inline json report_envelope(const std::string& command, json config, json results) {
  json j;
  j["command"] = command;
  j["config"] = std::move(config);
  j["defaults"] = defaults_to_json();
  j["results"] = std::move(results);
  return j;
}

inline void emit_report(const json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    atomic_write_text(out_path, text);
  }
}

}  // namespace atmen::io
