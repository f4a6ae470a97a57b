#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace handover::text {

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep, bool trim_fields = true);
std::string lower(std::string_view s);

/// Strict full-token parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest round-trip decimal representation; stable across runs and platforms.
std::string format_double(double v);

/// Missing-sample markers accepted in numeric CSV fields.
bool is_missing_marker(std::string_view s);

/// 64-bit FNV-1a, used for config and TF-spec fingerprints.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace handover::text
