#pragma once

#include <json.hpp>
#include <string>

#include "estimand_lab/dgp.hpp"

namespace estimand_lab {

// Parses "a/b" fraction strings (exact for dyadic denominators) or plain
// JSON numbers.
double parse_probability(const nlohmann::json& value);

// Schema (documented in README.md): keys `actions`, `p_treat`, `joint_law`
// (optional explicit table), `mu`, `nu` (optional), `assumption`,
// `joint_support` (optional), `full_support` (optional), `noise_sd`
// (optional). `actions` is either per-coordinate supports or the
// {"binomial": {n, pi_d0, pi_d1}} shorthand, which expands to explicit
// tables at build time.
Dgp dgp_from_json(const nlohmann::json& config);
Dgp load_dgp_file(const std::string& path);

// Exact serialization: re-parsing reproduces every table bit-for-bit.
nlohmann::json dgp_to_json(const Dgp& dgp);

}  // namespace estimand_lab
