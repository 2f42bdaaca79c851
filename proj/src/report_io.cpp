#include "estimand_lab/report_io.hpp"

#include <cstdio>

namespace estimand_lab {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

constexpr const char* kCsvVersion = "# estimand_lab csv v1";

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

const char* sign_name(Sign s) {
  switch (s) {
    case Sign::negative: return "negative";
    case Sign::zero: return "zero";
    case Sign::positive: return "positive";
  }
  return "zero";
}

json ssp_to_json(const SspVerdict& v) {
  return {{"premise_holds", v.premise_holds},
          {"estimand_sign", sign_name(v.estimand_sign)},
          {"violated", v.violated}};
}

void append_atom_columns(std::string& line, const Atom& a) {
  for (int value : a) {
    line += std::to_string(value);
    line += ',';
  }
}

}  // namespace

json report_to_json(const DecompositionReport& report, const ActionSpace& space) {
  const WeightTable& w = report.weights;
  json weights = {{"denominator", w.denominator},
                  {"sum_dce", w.sum_dce},
                  {"m_coeffs", vector_to_json(w.m_coeffs)}};
  if (w.has_ind) {
    weights["sum_ind"] = w.sum_ind;
    weights["sum_a_ind"] = vector_to_json(w.sum_a_ind);
  }

  json atoms = json::array();
  for (Eigen::Index i = 0; i < w.dce.size(); ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    json row = {{"a", space.atom(idx)},
                {"omega_dce", w.dce(i)},
                {"contrast_dce", report.contrast_dce(i)},
                {"contrast_sel", report.contrast_sel(i)},
                {"contribution_dce", w.dce(i) * report.contrast_dce(i)},
                {"contribution_sel", w.dce(i) * report.contrast_sel(i)}};
    if (w.has_ind) {
      row["omega_ind"] = w.ind(i);
      row["contrast_ind"] = report.contrast_ind(i);
      row["contribution_ind"] = w.ind(i) * report.contrast_ind(i);
    }
    atoms.push_back(row);
  }

  json out = {{"kind", to_string(report.kind)},
              {"assumption", to_string(report.assumption)},
              {"value", report.value},
              {"dce", report.dce},
              {"ind", report.ind},
              {"sel", report.sel},
              {"identity_residual", report.identity_residual},
              {"weights", weights},
              {"atoms", atoms}};
  if (report.atom) out["atom"] = *report.atom;
  if (report.ssp) out["ssp"] = ssp_to_json(*report.ssp);
  return out;
}

json sat_reports_to_json(const std::vector<DecompositionReport>& reports,
                         const ActionSpace& space) {
  json out = {{"kind", "sat"}, {"reports", json::array()}};
  if (!reports.empty()) out["assumption"] = to_string(reports.front().assumption);
  for (const auto& report : reports)
    out["reports"].push_back(report_to_json(report, space));
  return out;
}

json projection_to_json(const ProjectionResult& result) {
  json coefficients = json::object();
  for (std::size_t i = 0; i < result.names.size(); ++i)
    coefficients[result.names[i]] = result.coefficients(static_cast<Eigen::Index>(i));
  return {{"kind", to_string(result.kind)},
          {"names", result.names},
          {"coefficients", coefficients},
          {"dropped", result.dropped},
          {"min_eigenvalue", result.min_eigenvalue},
          {"max_orthogonality_residual", result.max_orthogonality_residual}};
}

json sim_report_to_json(const SimReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows)
    rows.push_back({{"kind", to_string(row.kind)},
                    {"name", row.name},
                    {"target", row.target},
                    {"mean", row.mean},
                    {"se", row.se},
                    {"z", row.z},
                    {"within", row.within},
                    {"mad", row.mad},
                    {"reps_present", row.reps_present}});
  return {{"config",
           {{"n", report.config.n}, {"reps", report.config.reps}, {"seed", report.config.seed}}},
          {"rows", rows},
          {"all_within", report.all_within},
          {"max_abs_z", report.max_abs_z}};
}

std::string report_to_csv(const DecompositionReport& report, const ActionSpace& space) {
  const WeightTable& w = report.weights;
  std::string out = kCsvVersion;
  out += "\n# kind=" + to_string(report.kind) + " assumption=" + to_string(report.assumption) +
         " value=" + format_double(report.value) + " dce=" + format_double(report.dce) +
         " ind=" + format_double(report.ind) + " sel=" + format_double(report.sel) + "\n";
  const int k = space.k();
  for (int j = 1; j <= k; ++j) out += "a" + std::to_string(j) + ",";
  out +=
      "omega_dce,omega_ind,contrast_dce,contrast_ind,contrast_sel,"
      "contribution_dce,contribution_ind,contribution_sel\n";
  for (Eigen::Index i = 0; i < w.dce.size(); ++i) {
    std::string line;
    append_atom_columns(line, space.atom(static_cast<std::size_t>(i)));
    const double ind = w.has_ind ? w.ind(i) : 0.0;
    const double contrast_ind = report.contrast_ind(i);
    line += format_double(w.dce(i)) + "," + format_double(ind) + "," +
            format_double(report.contrast_dce(i)) + "," + format_double(contrast_ind) + "," +
            format_double(report.contrast_sel(i)) + "," +
            format_double(w.dce(i) * report.contrast_dce(i)) + "," +
            format_double(ind * contrast_ind) + "," +
            format_double(w.dce(i) * report.contrast_sel(i)) + "\n";
    out += line;
  }
  return out;
}

std::string sat_reports_to_csv(const std::vector<DecompositionReport>& reports,
                               const ActionSpace& space) {
  std::string out = kCsvVersion;
  out += "\n# kind=sat";
  if (!reports.empty()) out += " assumption=" + to_string(reports.front().assumption);
  out += "\n";
  const int k = space.k();
  for (int j = 1; j <= k; ++j) out += "a" + std::to_string(j) + ",";
  out += "value,dce,sel,identity_residual\n";
  for (const auto& report : reports) {
    std::string line;
    append_atom_columns(line, report.atom.value());
    line += format_double(report.value) + "," + format_double(report.dce) + "," +
            format_double(report.sel) + "," + format_double(report.identity_residual) + "\n";
    out += line;
  }
  return out;
}

std::string sim_report_to_csv(const SimReport& report) {
  std::string out = kCsvVersion;
  out += "\n# n=" + std::to_string(report.config.n) + " reps=" + std::to_string(report.config.reps) +
         " seed=" + std::to_string(report.config.seed) + "\n";
  out += "kind,name,target,mean,se,z,within,mad,reps_present\n";
  for (const auto& row : report.rows) {
    out += to_string(row.kind) + "," + row.name + "," + format_double(row.target) + "," +
           format_double(row.mean) + "," + format_double(row.se) + "," + format_double(row.z) +
           "," + (row.within ? "1" : "0") + "," + format_double(row.mad) + "," +
           std::to_string(row.reps_present) + "\n";
  }
  return out;
}

}  // namespace estimand_lab
