// Command-line front end: population decompositions of treatment-effect
// regressions on discrete action spaces.
//
// Exit codes: 0 success; 2 invalid configuration or arguments; 3 singular
// design; 4 invariant violation (from `check` or an internal consistency
// guard). All output is assembled in memory first, so a failing run never
// leaves a partial file behind. Identical invocations produce identical
// bytes.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "estimand_lab/config.hpp"
#include "estimand_lab/decomposition.hpp"
#include "estimand_lab/diagnostics.hpp"
#include "estimand_lab/errors.hpp"
#include "estimand_lab/montecarlo.hpp"
#include "estimand_lab/projection.hpp"
#include "estimand_lab/report_io.hpp"
#include "estimand_lab/tolerances.hpp"

namespace {

using namespace estimand_lab;
using nlohmann::json;

bool debug_log_enabled() {
  static const bool on = [] {
    const char* v = std::getenv("ESTIMAND_LAB_LOG");
    return v != nullptr && std::string_view(v) == "debug";
  }();
  return on;
}

void logd(const std::string& msg) {
  if (debug_log_enabled()) std::cerr << "[estimand_lab] " << msg << "\n";
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    json config;
    in >> config;
    return config;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

Dgp load_dgp(const std::string& path, const std::string& assumption_override) {
  json config = load_config_json(path);
  if (!assumption_override.empty()) config["assumption"] = assumption_override;
  Dgp dgp = dgp_from_json(config);
  logd("loaded DGP from '" + path + "': K=" + std::to_string(dgp.space().k()) +
       ", atoms=" + std::to_string(dgp.space().num_atoms()) +
       ", assumption=" + to_string(dgp.assumption()));
  return dgp;
}

std::vector<double> parse_grid(const std::string& grid) {
  const auto first = grid.find(':');
  const auto second = grid.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos)
    throw ConfigError("--grid expects start:stop:step, got '" + grid + "'");
  double start = 0.0, stop = 0.0, step = 0.0;
  try {
    start = std::stod(grid.substr(0, first));
    stop = std::stod(grid.substr(first + 1, second - first - 1));
    step = std::stod(grid.substr(second + 1));
  } catch (const std::exception&) {
    throw ConfigError("--grid expects numeric start:stop:step, got '" + grid + "'");
  }
  if (!(step > 0.0)) throw ConfigError("--grid step must be positive");
  if (stop < start) throw ConfigError("--grid stop must not precede start");
  std::vector<double> points;
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) points.push_back(start + static_cast<double>(i) * step);
  return points;
}

// Rebuilds the DGP with the treatment share set to p, holding the
// conditional action laws pi_d, the outcome tables and the assumption fixed.
Dgp with_treatment_share(const Dgp& dgp, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ConfigError("swept treatment shares must lie strictly between 0 and 1");
  const ActionSpace& space = dgp.space();
  const MomentSet m = compute_moments(dgp);

  DgpInput input;
  input.coords = space.coords();
  input.joint_support = space.atoms();
  input.assumption = dgp.assumption();
  input.full_support = dgp.law().full_support;
  for (std::size_t i = 0; i < space.num_atoms(); ++i) {
    input.law.push_back(LawEntry{0, space.atom(i), (1.0 - p) * m.pi(0, i)});
    input.law.push_back(LawEntry{1, space.atom(i), p * m.pi(1, i)});
    for (int d = 0; d < 2; ++d) {
      input.mu.push_back(MeanEntry{d, space.atom(i), dgp.mu(d, i)});
      input.noise_sd.push_back(MeanEntry{d, space.atom(i), dgp.noise_sd(d, i)});
    }
    if (dgp.assumption() == Assumption::weak)
      for (int dp = 0; dp < 2; ++dp)
        for (int d = 0; d < 2; ++d)
          input.nu.push_back(NuEntry{dp, d, space.atom(i), dgp.nu(dp, d, i)});
  }
  return build_dgp(input);
}

WeightTable weights_for(const Dgp& dgp, RegressionKind kind) {
  switch (kind) {
    case RegressionKind::kShort: return weights_short(dgp);
    case RegressionKind::kLong: return weights_long(dgp);
    case RegressionKind::kInter: return weights_inter(dgp);
    case RegressionKind::kSfe: return weights_sfe(dgp);
    case RegressionKind::kInterStar: return inter_star(dgp).weights;
    case RegressionKind::kSat: break;
  }
  throw std::invalid_argument("the saturated regression has no scalar weight table to sweep");
}

int run_decompose(const std::string& dgp_path, const std::string& kind_name,
                  const std::string& assumption_override, const std::string& out_path,
                  bool as_csv) {
  const Dgp dgp = load_dgp(dgp_path, assumption_override);
  const RegressionKind kind = regression_kind_from_string(kind_name);
  std::string content;
  if (kind == RegressionKind::kSat) {
    const auto reports = decompose_sat(dgp);
    content = as_csv ? sat_reports_to_csv(reports, dgp.space())
                     : sat_reports_to_json(reports, dgp.space()).dump(2) + "\n";
  } else {
    const DecompositionReport report = decompose(dgp, kind);
    if (as_csv) {
      content = report_to_csv(report, dgp.space());
    } else {
      json out = report_to_json(report, dgp.space());
      if (kind == RegressionKind::kShort && dgp.assumption() == Assumption::strong) {
        const NaturalEffects ne = natural_effects(dgp);
        out["natural_effects"] = {{"zeta_bar0", ne.zeta_bar0},
                                  {"zeta_bar1", ne.zeta_bar1},
                                  {"delta_bar0", ne.delta_bar0},
                                  {"delta_bar1", ne.delta_bar1}};
      }
      content = out.dump(2) + "\n";
    }
  }
  write_output(out_path, content);
  return 0;
}

int run_sweep(const std::string& dgp_path, const std::string& kind_name,
              const std::string& assumption_override, const std::string& grid,
              const std::string& out_path) {
  const Dgp base = load_dgp(dgp_path, assumption_override);
  const RegressionKind kind = regression_kind_from_string(kind_name);
  const std::vector<double> points = parse_grid(grid);
  logd("sweep over " + std::to_string(points.size()) + " treatment shares");

  const ActionSpace& space = base.space();
  std::string content = "# estimand_lab csv v1\n# sweep kind=" + kind_name + " grid=" + grid + "\np,";
  for (int j = 1; j <= space.k(); ++j) content += "a" + std::to_string(j) + ",";
  content += "omega_dce,omega_ind\n";
  for (double p : points) {
    const Dgp swept = with_treatment_share(base, p);
    const WeightTable w = weights_for(swept, kind);
    for (std::size_t i = 0; i < space.num_atoms(); ++i) {
      content += format_double(p) + ",";
      for (int value : space.atom(i)) content += std::to_string(value) + ",";
      const double ind = w.has_ind ? w.ind(static_cast<Eigen::Index>(i)) : 0.0;
      content += format_double(w.dce(static_cast<Eigen::Index>(i))) + "," + format_double(ind) + "\n";
    }
  }
  write_output(out_path, content);
  return 0;
}

int run_search(const std::string& kind_name, int k, std::vector<int> support_sizes,
               std::uint64_t trials, std::uint64_t seed, bool mutually_exclusive,
               const std::string& out_dir) {
  const RegressionKind kind = regression_kind_from_string(kind_name);
  if (support_sizes.empty()) support_sizes.assign(static_cast<std::size_t>(k), 2);
  if (support_sizes.size() == 1 && k > 1)
    support_sizes.assign(static_cast<std::size_t>(k), support_sizes.front());
  const SearchResult result =
      search_negative_weights(kind, k, support_sizes, trials, seed, mutually_exclusive);

  json hits = json::array();
  for (const SearchHit& hit : result.hits) {
    char name[32];
    std::snprintf(name, sizeof(name), "hit_%06llu.json",
                  static_cast<unsigned long long>(hit.trial));
    json entry = {{"trial", hit.trial}, {"min_dce", hit.min_dce}};
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      json dump = {{"trial", hit.trial},
                   {"min_dce", hit.min_dce},
                   {"kind", to_string(hit.weights.kind)},
                   {"dgp", dgp_to_json(hit.dgp)}};
      json dce = json::array();
      json ind = json::array();
      for (Eigen::Index i = 0; i < hit.weights.dce.size(); ++i) dce.push_back(hit.weights.dce(i));
      for (Eigen::Index i = 0; i < hit.weights.ind.size(); ++i) ind.push_back(hit.weights.ind(i));
      dump["omega_dce"] = dce;
      dump["omega_ind"] = ind;
      write_output((std::filesystem::path(out_dir) / name).string(), dump.dump(2) + "\n");
      entry["file"] = name;
    }
    hits.push_back(entry);
  }

  json summary = {{"kind", kind_name},
                  {"trials_run", result.trials_run},
                  {"hit_count", result.hits.size()},
                  {"min_weight_observed", result.min_weight_observed},
                  {"hits", hits}};
  if (!result.note.empty()) summary["note"] = result.note;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_simulate(const std::string& dgp_path, const std::string& assumption_override,
                 std::size_t n, std::size_t reps, std::uint64_t seed,
                 const std::string& out_path, bool as_csv) {
  const Dgp dgp = load_dgp(dgp_path, assumption_override);
  SimConfig config;
  config.n = n;
  config.reps = reps;
  config.seed = seed;
  logd("simulate: n=" + std::to_string(n) + " reps=" + std::to_string(reps));
  const SimReport report = validate(dgp, config);
  const std::string content =
      as_csv ? sim_report_to_csv(report) : sim_report_to_json(report).dump(2) + "\n";
  write_output(out_path, content);
  return 0;
}

// Invariant battery over one DGP: covariance-route agreement, weight
// normalizations, decomposition identities, closed-form/projection agreement
// and projection orthogonality. Any failure exits with code 4.
int run_check(const std::string& dgp_path, const std::string& assumption_override) {
  const Dgp dgp = load_dgp(dgp_path, assumption_override);
  const ActionSpace& space = dgp.space();
  std::vector<std::string> failures;
  std::size_t checks = 0;
  auto require = [&](bool ok, const std::string& label) {
    ++checks;
    if (ok) {
      std::cout << "ok: " << label << "\n";
    } else {
      failures.push_back(label);
      std::cout << "FAIL: " << label << "\n";
    }
  };

  for (int j = 0; j < space.k(); ++j) {
    bool routes_agree = true;
    std::string detail;
    try {
      (void)cov_Aj_Y(dgp, j);
      (void)cov_DAj_Y(dgp, j);
    } catch (const ExpansionMismatch& e) {
      routes_agree = false;
      detail = e.what();
    }
    require(routes_agree, "covariance routes agree for coordinate " + std::to_string(j + 1) +
                              (detail.empty() ? "" : " (" + detail + ")"));
  }

  const std::vector<RegressionKind> kinds = [&] {
    std::vector<RegressionKind> v = {RegressionKind::kShort, RegressionKind::kLong,
                                     RegressionKind::kInter, RegressionKind::kSfe};
    if (space.k() == 1) v.push_back(RegressionKind::kInterStar);
    return v;
  }();
  auto skip = [](const std::string& label, const SingularDesign& e) {
    std::cout << "skip: " << label << " (singular design: " << e.what() << ")\n";
  };

  for (RegressionKind kind : kinds) {
    const std::string label = to_string(kind);
    try {
      const DecompositionReport report = decompose(dgp, kind);
      require(std::abs(report.weights.sum_dce - 1.0) < tol::kIdentity,
              label + ": direct weights sum to one");
      if (report.weights.has_ind) {
        require(std::abs(report.weights.sum_ind) < tol::kIdentity,
                label + ": indirect weights sum to zero");
        // The level-orthogonality identity is a property of the long-type
        // projections; the short regression's indirect weights recover
        // E[A|D=1] - E[A|D=0] instead.
        if (kind != RegressionKind::kShort)
          require(report.weights.sum_a_ind.cwiseAbs().maxCoeff() < tol::kIdentity,
                  label + ": indirect weights are orthogonal to the action levels");
      }
      if (kind == RegressionKind::kSfe)
        require(report.weights.dce.minCoeff() >= 0.0, label + ": weights are nonnegative");
      require(report.identity_residual < tol::kIdentity,
              label + ": value equals dce + ind + sel");
      if (dgp.assumption() == Assumption::strong)
        require(std::abs(report.sel) < tol::kExact, label + ": selection term vanishes");
    } catch (const SingularDesign& e) {
      skip(label, e);
    }
  }

  try {
    require(std::abs(delta_long_closed_form(dgp) - project(dgp, RegressionKind::kLong).delta()) <
                tol::kIdentity,
            "closed-form long coefficient matches the projection solver");
  } catch (const SingularDesign& e) {
    skip("closed-form long coefficient", e);
  }

  for (RegressionKind kind : {RegressionKind::kShort, RegressionKind::kLong,
                              RegressionKind::kInter, RegressionKind::kSfe,
                              RegressionKind::kSat}) {
    try {
      const ProjectionResult proj = project(dgp, kind);
      require(proj.max_orthogonality_residual < tol::kIdentity,
              to_string(kind) + ": population residual is orthogonal to the design");
    } catch (const SingularDesign& e) {
      skip(to_string(kind) + " projection", e);
    }
  }

  for (const DecompositionReport& report : decompose_sat(dgp))
    require(report.identity_residual < tol::kIdentity,
            "sat " + atom_label(*report.atom) + ": value equals dce + sel");

  if (dgp.assumption() == Assumption::strong) {
    const NaturalEffects ne = natural_effects(dgp);
    require(std::abs(ne.delta_bar0 - decompose_short(dgp).ind) < tol::kExact,
            "delta_bar(0) equals the short indirect term");
  }

  if (failures.empty()) {
    std::cout << "check passed (" << checks << " invariants)\n";
    return 0;
  }
  std::cout << "check failed (" << failures.size() << " of " << checks << " invariants)\n";
  return 4;
}

int run(int argc, char** argv) {
  CLI::App app{"Population decompositions of treatment-effect regressions"};
  app.require_subcommand(1);

  std::string dgp_path;
  std::string kind_name = "short";
  std::string assumption_override;
  std::string out_path;
  std::string grid;
  bool as_csv = false;
  std::uint64_t seed = 1;
  std::uint64_t trials = 1000;
  int k = 1;
  std::vector<int> support_sizes;
  bool mutually_exclusive = false;
  std::size_t n = 10000;
  std::size_t reps = 200;

  const std::string kind_help = "Regression kind: short|long|inter|sfe|sat|inter-star";

  CLI::App* dec = app.add_subcommand("decompose", "Decompose one regression estimand");
  dec->add_option("--dgp", dgp_path, "DGP config file (JSON)")->required();
  dec->add_option("--kind", kind_name, kind_help);
  dec->add_option("--assumption", assumption_override, "Override the config's assumption");
  dec->add_option("--out", out_path, "Output file (default: stdout)");
  dec->add_flag("--csv", as_csv, "Emit CSV instead of JSON");

  CLI::App* sweep = app.add_subcommand("sweep", "Recompute weights over a treatment-share grid");
  sweep->add_option("--dgp", dgp_path, "DGP config file (JSON)")->required();
  sweep->add_option("--kind", kind_name, kind_help);
  sweep->add_option("--assumption", assumption_override, "Override the config's assumption");
  sweep->add_option("--grid", grid, "Treatment-share grid start:stop:step")->required();
  sweep->add_option("--out", out_path, "Output file (default: stdout)");

  CLI::App* search = app.add_subcommand("search", "Randomized search for negative direct weights");
  search->add_option("--kind", kind_name, "Regression kind: long|inter")->required();
  search->add_option("--k", k, "Number of action coordinates")->required();
  search->add_option("--support", support_sizes, "Per-coordinate support sizes");
  search->add_option("--trials", trials, "Number of random DGPs to draw");
  search->add_option("--seed", seed, "Base seed for the trial streams");
  search->add_flag("--mutually-exclusive", mutually_exclusive,
                   "Restrict to mutually exclusive binary actions");
  search->add_option("--out", out_path, "Directory for per-hit DGP dumps");

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo check of sample estimators");
  sim->add_option("--dgp", dgp_path, "DGP config file (JSON)")->required();
  sim->add_option("--assumption", assumption_override, "Override the config's assumption");
  sim->add_option("--n", n, "Sample size per repetition");
  sim->add_option("--reps", reps, "Number of repetitions");
  sim->add_option("--seed", seed, "Base seed for the repetition streams");
  sim->add_option("--out", out_path, "Output file (default: stdout)");
  sim->add_flag("--csv", as_csv, "Emit CSV instead of JSON");

  CLI::App* check = app.add_subcommand("check", "Run the invariant battery on a DGP");
  check->add_option("--dgp", dgp_path, "DGP config file (JSON)")->required();
  check->add_option("--assumption", assumption_override, "Override the config's assumption");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*dec) return run_decompose(dgp_path, kind_name, assumption_override, out_path, as_csv);
  if (*sweep) return run_sweep(dgp_path, kind_name, assumption_override, grid, out_path);
  if (*search)
    return run_search(kind_name, k, support_sizes, trials, seed, mutually_exclusive, out_path);
  if (*sim) return run_simulate(dgp_path, assumption_override, n, reps, seed, out_path, as_csv);
  if (*check) return run_check(dgp_path, assumption_override);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const DgpValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SingularDesign& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SingularSampleDesign& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ExpansionMismatch& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
