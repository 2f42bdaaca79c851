#include "estimand_lab/config.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "estimand_lab/tolerances.hpp"

namespace estimand_lab {

using nlohmann::json;

double parse_probability(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw ConfigError("fraction '" + s + "' divides by zero");
      return num / den;
    } catch (const std::invalid_argument&) {
      throw ConfigError("cannot parse probability '" + s + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError("probability '" + s + "' out of range");
    }
  }
  throw ConfigError("probability must be a number or an 'a/b' string");
}

namespace {

Atom parse_atom(const json& j) {
  if (!j.is_array()) throw ConfigError("atom must be an array of integers");
  Atom a;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ConfigError("atom coordinates must be integers");
    a.push_back(v.get<int>());
  }
  return a;
}

struct ArmShorthand {
  int n = 0;
  double pi_d0 = 0.0;
  double pi_d1 = 0.0;
};

// `actions` is one binomial shorthand, a list of shorthands, or a list of
// plain supports. Shorthand coordinates are conditionally independent given
// the treatment arm, so the joint law factorizes per arm.
struct ActionsSpec {
  std::vector<std::vector<int>> coords;
  std::vector<ArmShorthand> shorthands;  // empty unless every coord is shorthand
};

ArmShorthand parse_binomial(const json& j) {
  if (!j.contains("n") || !j.contains("pi_d0") || !j.contains("pi_d1"))
    throw ConfigError("binomial shorthand needs keys n, pi_d0, pi_d1");
  ArmShorthand arm;
  arm.n = j.at("n").get<int>();
  arm.pi_d0 = parse_probability(j.at("pi_d0"));
  arm.pi_d1 = parse_probability(j.at("pi_d1"));
  return arm;
}

ActionsSpec parse_actions(const json& actions) {
  ActionsSpec spec;
  auto add_shorthand = [&spec](const ArmShorthand& arm) {
    std::vector<int> support(arm.n + 1);
    for (int v = 0; v <= arm.n; ++v) support[v] = v;
    spec.coords.push_back(std::move(support));
    spec.shorthands.push_back(arm);
  };
  if (actions.is_object() && actions.contains("binomial")) {
    add_shorthand(parse_binomial(actions.at("binomial")));
    return spec;
  }
  if (!actions.is_array() || actions.empty())
    throw ConfigError("'actions' must be a binomial shorthand or a nonempty array");
  bool all_shorthand = true;
  for (const auto& entry : actions) {
    if (entry.is_object() && entry.contains("binomial")) {
      add_shorthand(parse_binomial(entry.at("binomial")));
    } else if (entry.is_array()) {
      all_shorthand = false;
      std::vector<int> support;
      for (const auto& v : entry) support.push_back(v.get<int>());
      spec.coords.push_back(std::move(support));
    } else {
      throw ConfigError("each action coordinate must be a support array or binomial shorthand");
    }
  }
  if (!all_shorthand) spec.shorthands.clear();
  return spec;
}

std::vector<MeanEntry> parse_mean_rows(const json& rows, const std::string& name) {
  if (!rows.is_array()) throw ConfigError("'" + name + "' rows must be an array");
  std::vector<MeanEntry> entries;
  for (const auto& row : rows) {
    if (!row.contains("d") || !row.contains("a") || !row.contains("value"))
      throw ConfigError("'" + name + "' rows need keys d, a, value");
    entries.push_back(MeanEntry{row.at("d").get<int>(), parse_atom(row.at("a")),
                                row.at("value").get<double>()});
  }
  return entries;
}

}  // namespace

Dgp dgp_from_json(const json& config) {
  try {
    if (!config.is_object()) throw ConfigError("config root must be a JSON object");
    if (!config.contains("actions")) throw ConfigError("config needs an 'actions' key");
    if (!config.contains("mu")) throw ConfigError("config needs a 'mu' key");

    DgpInput input;
    const ActionsSpec actions = parse_actions(config.at("actions"));
    input.coords = actions.coords;

    if (config.contains("joint_support"))
      for (const auto& a : config.at("joint_support"))
        input.joint_support.push_back(parse_atom(a));
    input.full_support = config.value("full_support", true);
    input.assumption = assumption_from_string(config.value("assumption", "strong"));

    const std::vector<Atom> atoms =
        input.joint_support.empty() ? full_product(input.coords) : input.joint_support;

    if (config.contains("joint_law")) {
      for (const auto& row : config.at("joint_law")) {
        if (!row.contains("d") || !row.contains("a") || !row.contains("p"))
          throw ConfigError("'joint_law' rows need keys d, a, p");
        input.law.push_back(LawEntry{row.at("d").get<int>(), parse_atom(row.at("a")),
                                     parse_probability(row.at("p"))});
      }
      if (config.contains("p_treat")) {
        double mass = 0.0;
        for (const auto& e : input.law)
          if (e.d == 1) mass += e.p;
        if (std::abs(mass - parse_probability(config.at("p_treat"))) > tol::kProbSum)
          throw ConfigError("'p_treat' disagrees with the explicit joint law");
      }
    } else {
      if (actions.shorthands.empty())
        throw ConfigError("plain action supports need an explicit 'joint_law'");
      if (!config.contains("p_treat"))
        throw ConfigError("binomial shorthand needs 'p_treat'");
      const double p_treat = parse_probability(config.at("p_treat"));
      if (!(p_treat > 0.0 && p_treat < 1.0))
        throw ConfigError("'p_treat' must lie strictly between 0 and 1");
      std::vector<std::vector<double>> pmf_d0;
      std::vector<std::vector<double>> pmf_d1;
      for (const auto& arm : actions.shorthands) {
        pmf_d0.push_back(binomial_pmf(arm.n, arm.pi_d0));
        pmf_d1.push_back(binomial_pmf(arm.n, arm.pi_d1));
      }
      for (const Atom& a : atoms) {
        double cell0 = 1.0 - p_treat;
        double cell1 = p_treat;
        for (std::size_t j = 0; j < a.size(); ++j) {
          cell0 *= pmf_d0[j][a[j]];
          cell1 *= pmf_d1[j][a[j]];
        }
        input.law.push_back(LawEntry{0, a, cell0});
        input.law.push_back(LawEntry{1, a, cell1});
      }
    }

    const json& mu = config.at("mu");
    if (mu.is_object() && mu.contains("table")) {
      input.mu = parse_mean_rows(mu.at("table"), "mu.table");
    } else if (mu.is_object() && mu.contains("affine")) {
      const json& affine = mu.at("affine");
      const double c0 = affine.value("const", 0.0);
      const double cd = affine.value("d", 0.0);
      std::vector<double> ca(input.coords.size(), 0.0);
      std::vector<double> cad(input.coords.size(), 0.0);
      if (affine.contains("a"))
        for (std::size_t j = 0; j < ca.size(); ++j) ca[j] = affine.at("a").at(j).get<double>();
      if (affine.contains("ad"))
        for (std::size_t j = 0; j < cad.size(); ++j) cad[j] = affine.at("ad").at(j).get<double>();
      for (const Atom& a : atoms) {
        for (int d = 0; d < 2; ++d) {
          double value = c0 + cd * d;
          for (std::size_t j = 0; j < a.size(); ++j)
            value += ca[j] * a[j] + cad[j] * d * a[j];
          input.mu.push_back(MeanEntry{d, a, value});
        }
      }
    } else if (mu.is_array()) {
      input.mu = parse_mean_rows(mu, "mu");
    } else {
      throw ConfigError("'mu' must be a row array, {table: rows} or {affine: {...}}");
    }

    if (config.contains("nu")) {
      for (const auto& row : config.at("nu")) {
        if (!row.contains("d_prime") || !row.contains("d") || !row.contains("a") ||
            !row.contains("value"))
          throw ConfigError("'nu' rows need keys d_prime, d, a, value");
        input.nu.push_back(NuEntry{row.at("d_prime").get<int>(), row.at("d").get<int>(),
                                   parse_atom(row.at("a")), row.at("value").get<double>()});
      }
    }

    if (config.contains("noise_sd")) {
      const json& noise = config.at("noise_sd");
      if (noise.is_number())
        input.default_noise_sd = noise.get<double>();
      else
        input.noise_sd = parse_mean_rows(noise, "noise_sd");
    }

    return build_dgp(input);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

Dgp load_dgp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return dgp_from_json(config);
}

nlohmann::json dgp_to_json(const Dgp& dgp) {
  const ActionSpace& space = dgp.space();
  json out;
  out["assumption"] = to_string(dgp.assumption());
  out["full_support"] = dgp.law().full_support;

  json actions = json::array();
  for (const auto& support : space.coords()) actions.push_back(support);
  out["actions"] = actions;

  json support = json::array();
  for (const auto& a : space.atoms()) support.push_back(a);
  out["joint_support"] = support;

  json law = json::array();
  json mu = json::array();
  json noise = json::array();
  for (int d = 0; d < 2; ++d) {
    for (std::size_t i = 0; i < space.num_atoms(); ++i) {
      law.push_back({{"d", d}, {"a", space.atom(i)}, {"p", dgp.p(d, i)}});
      mu.push_back({{"d", d}, {"a", space.atom(i)}, {"value", dgp.mu(d, i)}});
      noise.push_back({{"d", d}, {"a", space.atom(i)}, {"value", dgp.noise_sd(d, i)}});
    }
  }
  out["joint_law"] = law;
  out["mu"] = {{"table", mu}};
  out["noise_sd"] = noise;

  // Strong-mode nu is reconstructed from mu on parse; only weak mode needs it.
  if (dgp.assumption() == Assumption::weak) {
    json nu = json::array();
    for (int dp = 0; dp < 2; ++dp)
      for (int d = 0; d < 2; ++d)
        for (std::size_t i = 0; i < space.num_atoms(); ++i)
          nu.push_back({{"d_prime", dp}, {"d", d}, {"a", space.atom(i)}, {"value", dgp.nu(dp, d, i)}});
    out["nu"] = nu;
  }
  return out;
}

}  // namespace estimand_lab
