// atmen — CND kernels, Schoenberg transforms, Mazur maps, Hilbert embeddings,
// affine isometric actions, and the shift-model construction, from the shell.
//
// Exit codes: 0 = every requested check passed; 1 = a mathematical property
// check failed (the report carries the witness); 2 = malformed input, blown
// resource budget, or bad usage.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "atmen/action.hpp"
#include "atmen/construction.hpp"
#include "atmen/defaults.hpp"
#include "atmen/embedding.hpp"
#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/io.hpp"
#include "atmen/kernel.hpp"
#include "atmen/measure.hpp"
#include "atmen/suite.hpp"

namespace {

using atmen::io::json;

struct CommonOut {
  std::string out_path;   // empty → stdout
  std::string format{"json"};
};

void add_out_flags(CLI::App* cmd, CommonOut& out, bool with_format = false) {
  cmd->add_option("--out", out.out_path, "write the report here (atomic) instead of stdout");
  if (with_format) {
    cmd->add_option("--format", out.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
  }
}

void emit(const CommonOut& out, const json& report, const std::string& csv = {}) {
  if (out.format == "csv") {
    if (out.out_path.empty()) {
      std::fputs(csv.c_str(), stdout);
    } else {
      atmen::io::atomic_write_text(out.out_path, csv);
    }
  } else {
    atmen::io::emit_report(report, out.out_path);
  }
}

int run_cnd_test(const std::string& kernel_path, double tol, const CommonOut& out) {
  const auto K = atmen::io::kernel_from_json(atmen::io::load_json(kernel_path));
  const auto r = atmen::kernels::cnd_test(K, tol);
  json results;
  results["labels"] = K.labels();
  results["cnd"] = atmen::io::cnd_report_to_json(r);
  emit(out, atmen::io::report_envelope(
                "cnd-test", json{{"kernel", kernel_path}, {"tol", tol}}, results));
  return r.is_cnd ? 0 : 1;
}

int run_power(const std::string& kernel_path, double alpha, bool allow_identity, double tol,
              const CommonOut& out) {
  const auto K = atmen::io::kernel_from_json(atmen::io::load_json(kernel_path));
  const auto Ka = atmen::kernels::power_transform(K, alpha, allow_identity);
  const auto r = atmen::kernels::cnd_test(Ka, tol);
  json results;
  results["kernel"] = atmen::io::kernel_to_json(Ka);
  results["cnd"] = atmen::io::cnd_report_to_json(r);
  emit(out, atmen::io::report_envelope(
                "power",
                json{{"kernel", kernel_path}, {"alpha", alpha}, {"allow_identity", allow_identity},
                     {"tol", tol}},
                results));
  return r.is_cnd ? 0 : 1;
}

int run_exp_test(const std::string& kernel_path, double t, double tol, const CommonOut& out) {
  const auto K = atmen::io::kernel_from_json(atmen::io::load_json(kernel_path));
  const auto r = atmen::kernels::exp_kernel_test(K, t, tol);
  json results;
  results["t"] = r.t;
  results["shifted_kernel_cnd"] = atmen::io::cnd_report_to_json(r.shifted);
  results["exp_min_eigenvalue"] = r.exp_min_eigenvalue;
  results["exp_psd_threshold"] = r.psd_threshold;
  results["exp_psd"] = r.exp_psd;
  results["passed"] = r.passed;
  emit(out, atmen::io::report_envelope(
                "exp-test", json{{"kernel", kernel_path}, {"t", t}, {"tol", tol}}, results));
  return r.passed ? 0 : 1;
}

int run_frullani(double x, double alpha, double rel_tol, const CommonOut& out) {
  const double got = atmen::kernels::frullani_power(x, alpha);
  const double want = std::pow(x, alpha);
  const double rel = std::abs(got - want) / want;
  json results;
  results["quadrature"] = got;
  results["exact"] = want;
  results["relative_error"] = rel;
  results["rel_tol"] = rel_tol;
  results["passed"] = rel <= rel_tol;
  emit(out, atmen::io::report_envelope(
                "frullani", json{{"x", x}, {"alpha", alpha}, {"rel_tol", rel_tol}}, results));
  return rel <= rel_tol ? 0 : 1;
}

int run_mazur(double p_from, double p_to, std::size_t samples, std::uint64_t seed,
              std::size_t atoms, const std::string& vector_path, const CommonOut& out) {
  json config{{"p_from", p_from}, {"p_to", p_to}, {"samples", samples}, {"seed", seed},
              {"atoms", atoms}};
  if (!vector_path.empty()) {
    // single-vector mode: transform and check the gauge transfer
    const auto v = atmen::io::lp_vector_from_json(atmen::io::load_json(vector_path));
    if (v.p != p_from) throw atmen::input_error("vector exponent does not match --p-from");
    const auto u = atmen::measure::mazur_map(v, p_from, p_to);
    const double sum_in = atmen::measure::pth_power_sum(v);
    const double sum_out = atmen::measure::pth_power_sum(u);
    const double deviation = std::abs(sum_out - sum_in) / (1.0 + std::abs(sum_in));
    config["vector"] = vector_path;
    json results;
    results["image"] = atmen::io::lp_vector_to_json(u);
    results["pth_power_sum_in"] = sum_in;
    results["pth_power_sum_out"] = sum_out;
    results["transfer_deviation"] = deviation;
    results["passed"] = deviation <= 1e-12;
    emit(out, atmen::io::report_envelope("mazur", config, results));
    return deviation <= 1e-12 ? 0 : 1;
  }
  const auto table = atmen::measure::mazur_modulus_estimate(p_from, p_to, samples, seed, atoms);
  emit(out,
       atmen::io::report_envelope("mazur", config,
                                  json{{"modulus", atmen::io::modulus_table_to_json(table)}}),
       atmen::io::modulus_table_csv(table));
  return 0;
}

int run_gns(const std::string& kernel_path, double tol, const CommonOut& out) {
  const auto K = atmen::io::kernel_from_json(atmen::io::load_json(kernel_path));
  try {
    const auto e = atmen::embedding::gns_embed(K, tol);
    json results;
    results["embedding"] = atmen::io::embedding_to_json(e);
    results["residual_target"] = atmen::defaults::kGnsResidualTarget;
    results["passed"] = e.gram_residual <= atmen::defaults::kGnsResidualTarget;
    emit(out, atmen::io::report_envelope(
                  "gns", json{{"kernel", kernel_path}, {"tol", tol}}, results));
    return e.gram_residual <= atmen::defaults::kGnsResidualTarget ? 0 : 1;
  } catch (const atmen::kernels::cnd_rejection& rej) {
    json results;
    results["cnd"] = atmen::io::cnd_report_to_json(rej.report);
    results["passed"] = false;
    emit(out, atmen::io::report_envelope(
                  "gns", json{{"kernel", kernel_path}, {"tol", tol}}, results));
    return 1;
  }
}

int run_escape(const std::string& group, const std::string& psi_name, long radius,
               const CommonOut& out) {
  const auto spec = atmen::groups::GroupSpec::parse(group);
  if (psi_name != "word-length") {
    throw atmen::input_error("unknown --psi '" + psi_name + "' (available: word-length)");
  }
  const auto ball = atmen::groups::ball(spec, radius);
  const auto psi = atmen::kernels::word_length_function(ball);
  std::vector<long> radii;
  for (long r = 1; r <= radius; ++r) radii.push_back(r);
  const auto rows = atmen::embedding::escape_profile(psi, radii);
  emit(out,
       atmen::io::report_envelope("escape",
                                  json{{"group", group}, {"psi", psi_name}, {"radius", radius}},
                                  json{{"profile", atmen::io::escape_profile_to_json(rows)}}),
       atmen::io::escape_profile_csv(rows));
  return 0;
}

int run_tree_action(long rank, double p, long radius, const CommonOut& out) {
  const auto action = atmen::actions::tree_cocycle(rank, p, radius);
  emit(out, atmen::io::action_to_json(action));
  return 0;
}

int run_verify(const std::string& action_path, long radius, double tol_isometry,
               double tol_cocycle, std::uint64_t seed, const CommonOut& out) {
  const auto action = atmen::io::action_from_json(atmen::io::load_json(action_path));
  if (radius < 0) {
    // infer the covered ball from the stored assignment
    radius = 0;
    for (const auto& [token, perm] : action.rep.assignment) {
      (void)perm;
      const auto g = atmen::groups::parse_element(action.rep.spec, token);
      radius = std::max(radius, atmen::groups::word_length(g));
    }
  }
  const auto ball = atmen::groups::ball(action.rep.spec, radius);
  const auto iso = atmen::actions::verify_isometry(action.rep, action.p, ball, tol_isometry, seed);
  const auto coc = atmen::actions::verify_cocycle(action, ball, tol_cocycle);
  json results;
  results["radius"] = radius;
  results["isometry"] = atmen::io::isometry_report_to_json(iso);
  results["cocycle"] = atmen::io::cocycle_report_to_json(coc);
  results["passed"] = iso.passed && coc.passed;
  emit(out, atmen::io::report_envelope("verify",
                                       json{{"action", action_path},
                                            {"radius", radius},
                                            {"tol_isometry", tol_isometry},
                                            {"tol_cocycle", tol_cocycle},
                                            {"seed", seed}},
                                       results));
  return iso.passed && coc.passed ? 0 : 1;
}

int run_profile(const std::string& action_path, long radius, const CommonOut& out) {
  const auto action = atmen::io::action_from_json(atmen::io::load_json(action_path));
  const auto profile = atmen::actions::properness_profile(action, radius);
  emit(out,
       atmen::io::report_envelope("profile", json{{"action", action_path}, {"radius", radius}},
                                  json{{"properness", atmen::io::properness_profile_to_json(profile)}}),
       atmen::io::properness_profile_csv(profile));
  return 0;
}

atmen::construction::MaterializePolicy parse_policy(const std::string& s) {
  if (s == "auto") return atmen::construction::MaterializePolicy::Auto;
  if (s == "always") return atmen::construction::MaterializePolicy::Always;
  return atmen::construction::MaterializePolicy::Never;
}

int run_construct(const std::string& group, double p, long radius, std::vector<double> eps,
                  const std::string& policy, std::uint64_t seed, const std::string& csv_profile,
                  const std::string& csv_decay, const CommonOut& out) {
  const auto spec = atmen::groups::GroupSpec::parse(group);
  const auto report = atmen::construction::construct_and_certify(spec, p, radius, eps,
                                                                 parse_policy(policy), {}, seed);
  if (!csv_profile.empty()) {
    atmen::io::atomic_write_text(csv_profile, atmen::io::properness_profile_csv(report.profile));
  }
  if (!csv_decay.empty()) {
    std::ostringstream decay;
    decay << "n,shift,discrepancy,inner\n";
    for (const auto& block : report.blocks) {
      std::vector<std::vector<long long>> shifts;
      for (long long s = 1; s <= std::min<long long>(block.n, radius); ++s) {
        shifts.push_back(std::vector<long long>(block.dims, 0));
        shifts.back()[0] = s;
      }
      for (const auto& row : atmen::construction::mixing_decay(block.n, shifts)) {
        decay << block.n << "," << row.shift[0] << "," << atmen::to_fraction_string(row.discrepancy)
              << "," << atmen::to_fraction_string(row.inner) << "\n";
      }
    }
    atmen::io::atomic_write_text(csv_decay, decay.str());
  }
  emit(out, atmen::io::report_envelope("construct",
                                       json{{"group", group},
                                            {"p", p},
                                            {"radius", radius},
                                            {"eps", eps},
                                            {"policy", policy},
                                            {"seed", seed}},
                                       atmen::io::certification_to_json(report)));
  return report.passed ? 0 : 1;
}

int run_suite_cmd(std::uint64_t seed, bool mutate, const CommonOut& out) {
  atmen::suite::SuiteConfig cfg;
  cfg.seed = seed;
  cfg.mutate_mazur_exponent = mutate;
  const auto report = atmen::suite::run_suite(cfg);
  for (const auto& r : report.results) {
    std::fprintf(stdout, "%-24s %s  %7.2fs  %s\n", r.name.c_str(),
                 r.passed ? "PASS" : "FAIL", r.elapsed_seconds, r.details.c_str());
  }
  std::fprintf(stdout, "suite: %s\n", report.all_passed() ? "ALL PASSED" : "FAILURES");
  const auto report_json = atmen::io::report_envelope(
      "suite", json{{"seed", seed}, {"mutate_mazur_exponent", mutate}},
      atmen::suite::suite_report_to_json(report));
  if (!out.out_path.empty()) {
    atmen::io::emit_report(report_json, out.out_path);
  }
  if (const char* scratch = std::getenv("ATMEN_SCRATCH")) {
    atmen::io::atomic_write_text(std::filesystem::path(scratch) / "suite-report.json",
                                 report_json.dump(2) + "\n");
  }
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditionally negative definite kernels, Mazur maps, affine isometric actions, "
               "and the shift-model properness construction"};
  app.require_subcommand(1);

  // cnd-test
  std::string kernel_path;
  double tol = atmen::defaults::kCndTolerance;
  CommonOut cnd_out;
  auto* cnd = app.add_subcommand("cnd-test", "test a kernel for conditional negative definiteness");
  cnd->add_option("--kernel", kernel_path, "kernel JSON ({labels, matrix})")->required();
  cnd->add_option("--tol", tol, "relative tolerance");
  add_out_flags(cnd, cnd_out);

  // power
  std::string power_kernel;
  double alpha = 0.5;
  bool allow_identity = false;
  double power_tol = atmen::defaults::kCndTolerance;
  CommonOut power_out;
  auto* power = app.add_subcommand("power", "Schoenberg power transform K^alpha of a CND kernel");
  power->add_option("--kernel", power_kernel, "kernel JSON")->required();
  power->add_option("--alpha", alpha, "exponent in (0,1)")->required();
  power->add_flag("--allow-identity", allow_identity, "accept alpha = 1 as the identity");
  power->add_option("--tol", power_tol, "CND tolerance for the transformed kernel");
  add_out_flags(power, power_out);

  // exp-test
  std::string exp_kernel;
  double exp_t = 1.0;
  double exp_tol = atmen::defaults::kCndTolerance;
  CommonOut exp_out;
  auto* expc = app.add_subcommand("exp-test",
                                  "Schoenberg duality: 1 - e^{-tK} CND and e^{-tK} PSD");
  expc->add_option("--kernel", exp_kernel, "kernel JSON")->required();
  expc->add_option("--t", exp_t, "exponential scale t > 0")->required();
  expc->add_option("--tol", exp_tol, "relative tolerance");
  add_out_flags(expc, exp_out);

  // frullani
  double fr_x = 1.0;
  double fr_alpha = 0.5;
  double fr_rel_tol = 1e-6;
  CommonOut fr_out;
  auto* fr = app.add_subcommand("frullani", "quadrature check of x^alpha = c_a int (1-e^{-tx}) t^{-a-1} dt");
  fr->add_option("--x", fr_x, "evaluation point x > 0")->required();
  fr->add_option("--alpha", fr_alpha, "exponent in (0,1)")->required();
  fr->add_option("--rel-tol", fr_rel_tol, "relative error budget");
  add_out_flags(fr, fr_out);

  // mazur
  double mz_from = 2.0;
  double mz_to = 1.0;
  std::size_t mz_samples = 1000;
  std::uint64_t mz_seed = atmen::defaults::kDefaultSeed;
  std::size_t mz_atoms = 32;
  std::string mz_vector;
  CommonOut mz_out;
  auto* mz = app.add_subcommand("mazur", "Mazur map: modulus estimate or single-vector transfer");
  mz->add_option("--p-from", mz_from, "source exponent")->required();
  mz->add_option("--p-to", mz_to, "target exponent")->required();
  mz->add_option("--samples", mz_samples, "sample pairs for the modulus estimate");
  mz->add_option("--seed", mz_seed, "RNG seed");
  mz->add_option("--atoms", mz_atoms, "atoms of the sampled measure space");
  mz->add_option("--vector", mz_vector, "transform this LpVector JSON instead of estimating");
  add_out_flags(mz, mz_out, /*with_format=*/true);

  // gns
  std::string gns_kernel;
  double gns_tol = atmen::defaults::kCndTolerance;
  CommonOut gns_out;
  auto* gns = app.add_subcommand("gns", "embed a CND kernel as squared Euclidean distances");
  gns->add_option("--kernel", gns_kernel, "kernel JSON")->required();
  gns->add_option("--tol", gns_tol, "CND/eigenvalue tolerance");
  add_out_flags(gns, gns_out);

  // escape
  std::string esc_group = "F2";
  std::string esc_psi = "word-length";
  long esc_radius = 5;
  CommonOut esc_out;
  auto* esc = app.add_subcommand("escape", "per-radius minimum of a function on group spheres");
  esc->add_option("--group", esc_group, "group spec, e.g. Z, Z^2, F2, Z x C6")->required();
  esc->add_option("--psi", esc_psi, "named function (word-length)");
  esc->add_option("--radius", esc_radius, "largest sphere radius");
  add_out_flags(esc, esc_out, /*with_format=*/true);

  // tree-action
  long tree_rank = 2;
  double tree_p = 1.5;
  long tree_radius = 3;
  CommonOut tree_out;
  auto* tree = app.add_subcommand("tree-action",
                                  "geodesic-chain cocycle of a free group on its tree edges");
  tree->add_option("--rank", tree_rank, "free rank >= 1")->required();
  tree->add_option("--p", tree_p, "gauge exponent p > 0")->required();
  tree->add_option("--radius", tree_radius, "domain ball radius")->required();
  add_out_flags(tree, tree_out);

  // verify
  std::string verify_action;
  long verify_radius = -1;
  double verify_tol_iso = atmen::defaults::kIsometryTolerance;
  double verify_tol_coc = atmen::defaults::kCocycleTolerance;
  std::uint64_t verify_seed = atmen::defaults::kDefaultSeed;
  CommonOut verify_out;
  auto* verify = app.add_subcommand("verify", "isometry + cocycle identity checks on an action bundle");
  verify->add_option("--action", verify_action, "action JSON bundle")->required();
  verify->add_option("--radius", verify_radius, "ball radius (default: inferred from the bundle)");
  verify->add_option("--tol-isometry", verify_tol_iso, "gauge preservation tolerance");
  verify->add_option("--tol-cocycle", verify_tol_coc, "cocycle identity tolerance");
  verify->add_option("--seed", verify_seed, "seed for sampled unit vectors");
  add_out_flags(verify, verify_out);

  // profile
  std::string profile_action;
  long profile_radius = 5;
  CommonOut profile_out;
  auto* profile = app.add_subcommand("profile", "properness profile: min cocycle gauge per sphere");
  profile->add_option("--action", profile_action, "action JSON bundle")->required();
  profile->add_option("--radius", profile_radius, "largest sphere radius");
  add_out_flags(profile, profile_out, /*with_format=*/true);

  // construct
  std::string con_group = "Z";
  double con_p = 1.5;
  long con_radius = 4;
  std::vector<double> con_eps{0.1, 0.05, 0.02};
  std::string con_policy = "auto";
  std::uint64_t con_seed = atmen::defaults::kDefaultSeed;
  std::string con_csv_profile;
  std::string con_csv_decay;
  CommonOut con_out;
  auto* con = app.add_subcommand("construct",
                                 "build + certify the truncated shift-model cocycle");
  con->add_option("--group", con_group, "Z or Z^d")->required();
  con->add_option("--p", con_p, "exponent (theorem range (1,2); machinery accepts (0,2))")->required();
  con->add_option("--radius", con_radius, "certification ball radius")->required();
  con->add_option("--eps", con_eps, "decreasing near-invariance targets")->delimiter(',');
  con->add_option("--policy", con_policy, "materialization policy")
      ->check(CLI::IsMember({"auto", "always", "never"}));
  con->add_option("--seed", con_seed, "seed for isometry spot checks");
  con->add_option("--csv-profile", con_csv_profile, "write the properness profile CSV here");
  con->add_option("--csv-decay", con_csv_decay, "write the mixing decay CSV here");
  add_out_flags(con, con_out);

  // suite
  std::uint64_t suite_seed = atmen::defaults::kDefaultSeed;
  bool suite_mutate = false;
  CommonOut suite_out;
  auto* suite = app.add_subcommand("suite", "run the full acceptance battery");
  suite->add_option("--seed", suite_seed, "master seed");
  suite->add_flag("--mutate-mazur-exponent", suite_mutate,
                  "falsifiability fixture: flip the Mazur exponent sign")
      ->group("");  // hidden
  add_out_flags(suite, suite_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cnd->parsed()) return run_cnd_test(kernel_path, tol, cnd_out);
    if (power->parsed()) return run_power(power_kernel, alpha, allow_identity, power_tol, power_out);
    if (expc->parsed()) return run_exp_test(exp_kernel, exp_t, exp_tol, exp_out);
    if (fr->parsed()) return run_frullani(fr_x, fr_alpha, fr_rel_tol, fr_out);
    if (mz->parsed())
      return run_mazur(mz_from, mz_to, mz_samples, mz_seed, mz_atoms, mz_vector, mz_out);
    if (gns->parsed()) return run_gns(gns_kernel, gns_tol, gns_out);
    if (esc->parsed()) return run_escape(esc_group, esc_psi, esc_radius, esc_out);
    if (tree->parsed()) return run_tree_action(tree_rank, tree_p, tree_radius, tree_out);
    if (verify->parsed())
      return run_verify(verify_action, verify_radius, verify_tol_iso, verify_tol_coc, verify_seed,
                        verify_out);
    if (profile->parsed()) return run_profile(profile_action, profile_radius, profile_out);
    if (con->parsed())
      return run_construct(con_group, con_p, con_radius, con_eps, con_policy, con_seed,
                           con_csv_profile, con_csv_decay, con_out);
    if (suite->parsed()) return run_suite_cmd(suite_seed, suite_mutate, suite_out);
  } catch (const atmen::kernels::cnd_rejection& e) {
    std::fprintf(stderr, "property check failed: %s\n", e.what());
    return 1;
  } catch (const atmen::input_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const atmen::resource_error& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 2;
  } catch (const atmen::inconsistency_error& e) {
    std::fprintf(stderr, "inconsistency: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
