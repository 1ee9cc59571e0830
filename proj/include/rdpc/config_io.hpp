#pragma once

// Flat key-value text format for run and sweep configuration.
//
//     # comment
//     mode = end_to_end
//     objective = rdc
//     dim = 3
//     levels = 3
//     lambda_c = 0.015
//
// Keys are the RunConfig field names; optimizer rows use
// <component>_lr / <component>_beta1 / <component>_beta2.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "rdpc/datamodel.hpp"

namespace rdpc {

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Parses `key = value` lines. Throws std::invalid_argument on malformed
/// lines or duplicate keys.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values_file(const std::string& path);

/// Shortest decimal text that parses back to the same double ("inf", "nan"
/// for the non-finite values).
std::string format_double(double v);
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);

/// Builds a RunConfig from defaults overridden by `kv`. Unknown keys throw.
RunConfig run_config_from(const KeyValues& kv);
RunConfig parse_run_config(std::string_view text);

/// Canonical text: every field, fixed order, shortest round-trip numbers.
std::string serialize(const RunConfig& config);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Content hash of the canonical config (which includes the seed).
std::string run_id(const RunConfig& config);

}  // namespace rdpc
