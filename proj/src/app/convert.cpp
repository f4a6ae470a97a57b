#include "handover/app/convert.hpp"

#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

namespace handover::app {

namespace fs = std::filesystem;

namespace {

// Sampling rate from the first two rows of a stream file.
double rate_of(const fs::path& file) {
  std::ifstream in(file);
  std::string header, a, b;
  if (!std::getline(in, header) || !std::getline(in, a) || !std::getline(in, b)) {
    throw DataError(file.string(), 0, "needs a header and at least two rows to infer the sampling rate");
  }
  const auto t0 = text::parse_double(text::split(a, ',').front());
  const auto t1 = text::parse_double(text::split(b, ',').front());
  if (!t0 || !t1 || !(*t1 > *t0)) throw DataError(file.string(), 3, "time column is not increasing");
  // Round to a micro-hertz so files with a printed step like 0.004 map to 250 Hz.
  return std::round(1e6 / (*t1 - *t0)) / 1e6;
}

std::vector<std::string> header_of(const fs::path& file) {
  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  auto cols = text::split(header, ',');
  if (cols.size() < 2) throw DataError(file.string(), 1, "header needs a time column and data columns");
  cols.erase(cols.begin());
  return cols;
}

}  // namespace

int convert_dataset(const fs::path& archive, const fs::path& out_dir) {
  if (!fs::is_directory(archive)) throw DataError("archive directory not found: " + archive.string());
  const std::regex sub_re(R"(sub-(\d+))");
  std::vector<std::pair<int, fs::path>> subjects;
  for (const auto& entry : fs::directory_iterator(archive)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && std::regex_match(name, m, sub_re)) subjects.emplace_back(std::stoi(m[1]), entry.path());
  }
  if (subjects.empty()) throw DataError("no sub-XX directories in " + archive.string());
  std::sort(subjects.begin(), subjects.end());

  fs::create_directories(out_dir);
  DatasetManifest manifest;
  const char* suffix[3] = {"eeg", "gaze", "motion"};
  char buf[64];
  for (const auto& [pid, dir] : subjects) {
    const fs::path events = dir / "events.csv";
    std::ifstream in(events);
    if (!in) throw DataError("missing " + events.string());
    std::string line;
    std::getline(in, line);
    const auto cols = text::split(text::lower(line), ',');
    const auto col = [&](const char* name) {
      const auto it = std::find(cols.begin(), cols.end(), name);
      if (it == cols.end()) throw DataError(events.string(), 1, std::string("header lacks column '") + name + "'");
      return static_cast<std::size_t>(it - cols.begin());
    };
    const std::size_t c_trial = col("trial"), c_cond = col("condition"), c_onset = col("onset_s");
    std::snprintf(buf, sizeof buf, "p%02d", pid);
    const std::string pdir = buf;
    fs::create_directories(out_dir / pdir);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      const auto f = text::split(line, ',');
      if (f.size() < cols.size()) throw DataError(events.string(), lineno, "too few fields");
      const auto trial = text::parse_int(f[c_trial]);
      const auto onset = text::parse_double(f[c_onset]);
      if (!trial || !onset) throw DataError(events.string(), lineno, "malformed trial or onset");
      ManifestEntry e;
      e.participant_id = pid;
      e.trial_id = static_cast<int>(*trial);
      try {
        e.condition = parse_condition(f[c_cond]);
      } catch (const Error& err) {
        throw DataError(events.string(), lineno, err.what());
      }
      e.onset_s = *onset;
      std::string* paths[3] = {&e.eeg_path, &e.gaze_path, &e.motion_path};
      for (int m = 0; m < 3; ++m) {
        std::snprintf(buf, sizeof buf, "trial-%03d_%s.csv", e.trial_id, suffix[m]);
        const fs::path src = dir / buf;
        if (!fs::is_regular_file(src)) continue;
        std::snprintf(buf, sizeof buf, "/t%03d_%s.csv", e.trial_id, suffix[m]);
        *paths[m] = pdir + buf;
        fs::copy_file(src, out_dir / *paths[m], fs::copy_options::overwrite_existing);
        if (m == 0 && !manifest.eeg_rate_hz) {
          manifest.eeg_rate_hz = rate_of(src);
          manifest.eeg_channels = header_of(src);
        } else if (m == 1 && !manifest.gaze_rate_hz) {
          manifest.gaze_rate_hz = rate_of(src);
        } else if (m == 2 && !manifest.motion_rate_hz) {
          manifest.motion_rate_hz = rate_of(src);
        }
      }
      manifest.trials.push_back(e);
    }
  }
  write_manifest(out_dir / "manifest.txt", manifest);
  load_dataset(out_dir, out_dir / "manifest.txt");
  return static_cast<int>(manifest.trials.size());
}

}  // namespace handover::app
