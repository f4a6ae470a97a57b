#include "handover/app/report.hpp"

#include "handover/app/config.hpp"
#include "handover/app/run.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"

#include <fstream>
#include <sstream>

namespace handover::app {

namespace fs = std::filesystem;

namespace {

// Median file rows: tag, model, window_end, median, q25, q75, n_participants.
void median_to_figure(const fs::path& in, const fs::path& out) {
  std::ifstream src(in);
  std::ofstream dst(out);
  if (!dst) throw DataError("cannot write " + out.string());
  dst << "series,window_end,median,lower,upper,onset_x\n";
  std::string line;
  std::getline(src, line);
  std::size_t lineno = 1;
  while (std::getline(src, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 7) throw DataError(in.string(), lineno, "expected 7 columns");
    dst << f[0] << ',' << f[2] << ',' << f[3] << ',' << f[4] << ',' << f[5] << ",0\n";
  }
}

}  // namespace

std::vector<fs::path> make_report(const fs::path& results_dir) {
  const fs::path meta = results_dir / "run_metadata.txt";
  std::vector<fs::path> missing;
  if (!fs::is_regular_file(meta)) {
    throw DataError("results directory " + results_dir.string() +
                    " is incomplete; expected run_metadata.txt, timelines.csv, median_<model>.csv and latency_<model>.csv");
  }
  std::ifstream in(meta);
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config_text(ss.str(), meta.string(), results_dir);
  cfg.out_dir = results_dir;
  for (const auto& p : expected_outputs(cfg))
    if (!fs::is_regular_file(p)) missing.push_back(p);
  if (!missing.empty()) {
    std::string list;
    for (const auto& p : missing) list += "\n  " + p.string();
    throw DataError("results directory " + results_dir.string() + " is missing expected files:" + list);
  }

  const fs::path fig = results_dir / "figures";
  fs::create_directories(fig);
  std::vector<fs::path> written;
  const std::string model = evaluation::to_string(cfg.model);
  median_to_figure(results_dir / ("median_" + model + ".csv"), fig / ("median_" + model + ".csv"));
  written.push_back(fig / ("median_" + model + ".csv"));
  if (!cfg.fusion_modes.empty()) {
    median_to_figure(results_dir / "median_fusion.csv", fig / "median_fusion.csv");
    written.push_back(fig / "median_fusion.csv");
  }
  return written;
}

}  // namespace handover::app
