#pragma once

#include <filesystem>
#include <vector>

namespace handover::app {

/// Turns a finished run directory into plot-ready data under `<results>/figures`:
/// one long-format CSV per figure with columns series, window_end, median, lower, upper,
/// onset_x (the dashed onset marker, always 0). Returns the files written.
/// Throws DataError listing every expected file that is missing.
std::vector<std::filesystem::path> make_report(const std::filesystem::path& results_dir);

}  // namespace handover::app
