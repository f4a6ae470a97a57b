#include "handover/core/dataset.hpp"

#include "handover/core/error.hpp"
#include "handover/core/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace handover {

namespace fs = std::filesystem;

Eigen::Index grid_count(double start, double end, double step) {
  if (!(step > 0.0)) throw SpecError("grid step must be positive");
  if (end <= start) return 0;
  return static_cast<Eigen::Index>(std::ceil((end - start) / step - kGridTolerance));
}

namespace {

// Index of the first grid point at or after time t.
Eigen::Index first_index_at_or_after(const TimeSeries& s, double t) {
  return static_cast<Eigen::Index>(std::ceil((t - s.start_time_s) / s.step_s - kGridTolerance));
}

std::string coverage_text(const TimeSeries& s) {
  return "[" + text::format_double(s.start_time_s) + ", " + text::format_double(s.end_time()) +
         ")";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<double> times;
  Matrix values;  // [rows x (columns - 1)]
};

CsvTable read_numeric_csv(const fs::path& file, bool allow_missing) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string(), 0, "cannot open file");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!text::trim(line).empty()) break;
  }
  table.header = text::split(line, ',');
  if (table.header.size() < 2) throw DataError(file.string(), line_no, "header needs a time column and at least one data column");
  const std::size_t cols = table.header.size();

  std::vector<double> data;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != cols) {
      throw DataError(file.string(), line_no,
                      "expected " + std::to_string(cols) + " fields, found " + std::to_string(fields.size()));
    }
    const auto t = text::parse_double(fields[0]);
    if (!t) throw DataError(file.string(), line_no, "malformed time value '" + fields[0] + "'");
    table.times.push_back(*t);
    for (std::size_t c = 1; c < cols; ++c) {
      if (auto v = text::parse_double(fields[c])) {
        data.push_back(*v);
      } else if (allow_missing && text::is_missing_marker(fields[c])) {
        data.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        throw DataError(file.string(), line_no,
                        "malformed numeric value '" + fields[c] + "' in column '" + table.header[c] + "'");
      }
    }
  }
  const auto rows = static_cast<Eigen::Index>(table.times.size());
  const auto dcols = static_cast<Eigen::Index>(cols - 1);
  table.values.resize(rows, dcols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < dcols; ++c) table.values(r, c) = data[static_cast<std::size_t>(r * dcols + c)];
  return table;
}

// Builds an onset-relative uniform series from the time column, checking grid uniformity
// and (when declared) the manifest sampling rate.
TimeSeries to_series(const fs::path& file, const CsvTable& table, double onset_s,
                     std::optional<double> declared_rate, double nominal_rate) {
  if (table.times.empty()) throw DataError(file.string(), 0, "no data rows");
  const std::size_t n = table.times.size();
  double step;
  if (n == 1) {
    step = 1.0 / declared_rate.value_or(nominal_rate);
  } else {
    step = (table.times.back() - table.times.front()) / static_cast<double>(n - 1);
    if (!(step > 0.0)) throw DataError(file.string(), 2, "time column is not increasing");
    for (std::size_t i = 1; i < n; ++i) {
      const double d = table.times[i] - table.times[i - 1];
      if (std::abs(d - step) > 1e-3 * step) {
        throw DataError(file.string(), i + 2, "non-uniform time grid (step " +
                                                   text::format_double(d) + " vs mean " +
                                                   text::format_double(step) + ")");
      }
    }
    if (declared_rate) {
      const double rate = 1.0 / step;
      if (std::abs(rate - *declared_rate) > 5e-3 * *declared_rate) {
        throw DataError(file.string(), 0, "sampling rate " + text::format_double(rate) +
                                              " Hz does not match manifest rate " +
                                              text::format_double(*declared_rate) + " Hz");
      }
      step = 1.0 / *declared_rate;
    }
  }
  return TimeSeries(table.times.front() - onset_s, step, table.values);
}

void expect_header(const fs::path& file, const CsvTable& table,
                   const std::vector<std::string>& names) {
  if (table.header.size() != names.size() + 1) {
    throw DataError(file.string(), 1, "expected " + std::to_string(names.size() + 1) +
                                          " columns, found " + std::to_string(table.header.size()));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (text::lower(table.header[i + 1]) != names[i]) {
      throw DataError(file.string(), 1, "column " + std::to_string(i + 2) + " should be '" +
                                            names[i] + "', found '" + table.header[i + 1] + "'");
    }
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

// The stream's lattice point preceding its first sample lies before t, so no grid
// point in [t, ...) is missing at the front.
bool starts_within_one_step(const TimeSeries& s, double t) {
  return (t - s.start_time_s) / s.step_s > -1.0 + kGridTolerance;
}

}  // namespace

bool covers(const TimeSeries& stream, double start_s, double end_s) {
  if (stream.samples() == 0) return false;
  const Eigen::Index i0 = first_index_at_or_after(stream, start_s);
  const Eigen::Index i1 = first_index_at_or_after(stream, end_s);
  return starts_within_one_step(stream, start_s) && i0 >= 0 && i1 <= stream.samples();
}

TimeSeries epoch(const TimeSeries& stream, double window_start_s, double window_end_s) {
  if (!(window_start_s < window_end_s)) {
    throw SpecError("epoch window start must precede its end");
  }
  const Eigen::Index i0 = first_index_at_or_after(stream, window_start_s);
  const Eigen::Index i1 = first_index_at_or_after(stream, window_end_s);
  if (!starts_within_one_step(stream, window_start_s) || i0 < 0 || i1 > stream.samples()) {
    throw CoverageError("window [" + text::format_double(window_start_s) + ", " +
                            text::format_double(window_end_s) +
                            ") is outside the stream coverage " + coverage_text(stream),
                        stream.start_time_s, stream.end_time());
  }
  if (i1 <= i0) {
    throw CoverageError("window [" + text::format_double(window_start_s) + ", " +
                            text::format_double(window_end_s) + ") contains no samples",
                        stream.start_time_s, stream.end_time());
  }
  return TimeSeries(stream.time_at(i0), stream.step_s, stream.values.middleRows(i0, i1 - i0));
}

DatasetManifest parse_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string(), 0, "cannot open manifest");
  DatasetManifest m;
  std::string line;
  std::size_t line_no = 0;
  bool in_trials = false;
  bool header_seen = false;
  std::map<std::string, std::size_t> col;
  std::set<TrialKey> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t == "[trials]") {
      in_trials = true;
      continue;
    }
    if (!in_trials) {
      const auto eq = t.find('=');
      if (eq == std::string_view::npos) throw DataError(file.string(), line_no, "expected key = value");
      const std::string key = text::lower(text::trim(t.substr(0, eq)));
      const std::string_view value = text::trim(t.substr(eq + 1));
      auto number = [&]() {
        const auto v = text::parse_double(value);
        if (!v || *v <= 0) throw DataError(file.string(), line_no, "'" + key + "' must be a positive number");
        return *v;
      };
      if (key == "format") {
        if (value != "handover-manifest") throw DataError(file.string(), line_no, "unsupported manifest format '" + std::string(value) + "'");
      } else if (key == "version") {
        const auto v = text::parse_int(value);
        if (!v || *v != 1) throw DataError(file.string(), line_no, "unsupported manifest version");
        m.version = 1;
      } else if (key == "eeg_rate_hz") {
        m.eeg_rate_hz = number();
      } else if (key == "gaze_rate_hz") {
        m.gaze_rate_hz = number();
      } else if (key == "motion_rate_hz") {
        m.motion_rate_hz = number();
      } else if (key == "eeg_channels") {
        m.eeg_channels = text::split(value, ',');
      } else {
        throw DataError(file.string(), line_no, "unknown manifest key '" + key + "'");
      }
      continue;
    }
    const auto fields = text::split(t, ',');
    if (!header_seen) {
      for (std::size_t i = 0; i < fields.size(); ++i) col[text::lower(fields[i])] = i;
      for (const char* required : {"participant", "trial", "condition", "onset_s", "eeg", "gaze", "motion"}) {
        if (!col.count(required)) throw DataError(file.string(), line_no, std::string("trial header lacks column '") + required + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != col.size()) {
      throw DataError(file.string(), line_no, "expected " + std::to_string(col.size()) + " fields, found " + std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.line = line_no;
    const auto pid = text::parse_int(fields[col["participant"]]);
    const auto tid = text::parse_int(fields[col["trial"]]);
    const auto onset = text::parse_double(fields[col["onset_s"]]);
    if (!pid || *pid < 1) throw DataError(file.string(), line_no, "participant id must be an integer >= 1");
    if (!tid || *tid < 0) throw DataError(file.string(), line_no, "trial id must be an integer >= 0");
    if (!onset) throw DataError(file.string(), line_no, "malformed onset_s");
    e.participant_id = static_cast<int>(*pid);
    e.trial_id = static_cast<int>(*tid);
    e.onset_s = *onset;
    try {
      e.condition = parse_condition(fields[col["condition"]]);
    } catch (const SpecError& err) {
      throw DataError(file.string(), line_no, err.what());
    }
    auto path_of = [&](const char* name) {
      const std::string& p = fields[col[name]];
      return (p == "-" || p.empty()) ? std::string() : p;
    };
    e.eeg_path = path_of("eeg");
    e.gaze_path = path_of("gaze");
    e.motion_path = path_of("motion");
    if (!seen.insert({e.participant_id, e.trial_id}).second) {
      throw DataError(file.string(), line_no, "duplicate participant/trial pair " +
                                                  std::to_string(e.participant_id) + "/" +
                                                  std::to_string(e.trial_id));
    }
    m.trials.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const fs::path& file, const DatasetManifest& m) {
  std::ofstream out(file);
  if (!out) throw DataError(file.string(), 0, "cannot write manifest");
  out << "# handover intention dataset manifest\n";
  out << "format = handover-manifest\nversion = 1\n";
  if (m.eeg_rate_hz) out << "eeg_rate_hz = " << text::format_double(*m.eeg_rate_hz) << "\n";
  if (m.gaze_rate_hz) out << "gaze_rate_hz = " << text::format_double(*m.gaze_rate_hz) << "\n";
  if (m.motion_rate_hz) out << "motion_rate_hz = " << text::format_double(*m.motion_rate_hz) << "\n";
  if (!m.eeg_channels.empty()) {
    out << "eeg_channels = ";
    for (std::size_t i = 0; i < m.eeg_channels.size(); ++i) out << (i ? "," : "") << m.eeg_channels[i];
    out << "\n";
  }
  out << "[trials]\nparticipant,trial,condition,onset_s,eeg,gaze,motion\n";
  auto p = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
  for (const auto& e : m.trials) {
    out << e.participant_id << ',' << e.trial_id << ',' << to_string(e.condition) << ','
        << text::format_double(e.onset_s) << ',' << p(e.eeg_path) << ',' << p(e.gaze_path) << ','
        << p(e.motion_path) << '\n';
  }
}

std::vector<TrialRecording> load_dataset(const fs::path& root, const DatasetManifest& manifest) {
  std::vector<TrialRecording> out;
  out.reserve(manifest.trials.size());
  for (const auto& e : manifest.trials) {
    TrialRecording t;
    t.participant_id = e.participant_id;
    t.trial_id = e.trial_id;
    t.condition = e.condition;
    t.onset_time_s = e.onset_s;

    if (!e.eeg_path.empty() && fs::exists(root / e.eeg_path)) {
      const fs::path f = root / e.eeg_path;
      const CsvTable table = read_numeric_csv(f, false);
      RawEeg eeg;
      eeg.channel_names.assign(table.header.begin() + 1, table.header.end());
      if (!manifest.eeg_channels.empty() && eeg.channel_names != manifest.eeg_channels) {
        throw DataError(f.string(), 1, "EEG channel columns do not match the manifest channel list");
      }
      eeg.series = to_series(f, table, e.onset_s, manifest.eeg_rate_hz, 250.0);
      eeg.truncated = !covers(eeg.series, kEpochStart, kEpochEnd);
      t.eeg = std::move(eeg);
    }
    if (!e.gaze_path.empty() && fs::exists(root / e.gaze_path)) {
      const fs::path f = root / e.gaze_path;
      const CsvTable table = read_numeric_csv(f, true);
      expect_header(f, table, {"x", "y", "refx", "refy"});
      const TimeSeries all = to_series(f, table, e.onset_s, manifest.gaze_rate_hz, 25.0);
      RawGaze gaze;
      gaze.gaze_xy = TimeSeries(all.start_time_s, all.step_s, all.values.leftCols(2));
      gaze.reference_xy = TimeSeries(all.start_time_s, all.step_s, all.values.rightCols(2));
      gaze.truncated = !covers(gaze.gaze_xy, kEpochStart, kEpochEnd);
      t.gaze = std::move(gaze);
    }
    if (!e.motion_path.empty() && fs::exists(root / e.motion_path)) {
      const fs::path f = root / e.motion_path;
      const CsvTable table = read_numeric_csv(f, false);
      expect_header(f, table, {"x", "y", "z"});
      RawMotion motion;
      motion.hand_xyz = to_series(f, table, e.onset_s, manifest.motion_rate_hz, 5.0);
      motion.truncated = !covers(motion.hand_xyz, kEpochStart, kEpochEnd);
      t.motion = std::move(motion);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TrialRecording> load_dataset(const fs::path& root, const fs::path& manifest_file) {
  return load_dataset(root, parse_manifest(manifest_file));
}

bool usable(const TrialRecording& trial, Modality modality) {
  switch (modality) {
    case Modality::Eeg: {
      if (!trial.eeg || trial.eeg->truncated) return false;
      if (!covers(trial.eeg->series, kEpochStart, kEpochEnd)) return false;
      return all_finite(epoch(trial.eeg->series, kEpochStart, kEpochEnd).values);
    }
    case Modality::Gaze: {
      if (!trial.gaze || trial.gaze->truncated) return false;
      if (!covers(trial.gaze->gaze_xy, kEpochStart, kEpochEnd) ||
          !covers(trial.gaze->reference_xy, kEpochStart, kEpochEnd)) {
        return false;
      }
      const TimeSeries g = epoch(trial.gaze->gaze_xy, kEpochStart, kEpochEnd);
      const TimeSeries r = epoch(trial.gaze->reference_xy, kEpochStart, kEpochEnd);
      if (!all_finite(r.values)) return false;
      for (Eigen::Index c = 0; c < g.dims(); ++c) {
        if (!g.values.col(c).array().isFinite().any()) return false;
      }
      return true;
    }
    case Modality::Motion: {
      if (!trial.motion || trial.motion->truncated) return false;
      if (!covers(trial.motion->hand_xyz, kEpochStart, kEpochEnd)) return false;
      return all_finite(epoch(trial.motion->hand_xyz, kEpochStart, kEpochEnd).values);
    }
  }
  return false;
}

std::vector<std::pair<int, int>> usable_trial_counts(const std::vector<LabeledTrial>& trials,
                                                     const std::set<Modality>& modalities) {
  std::map<int, int> counts;
  for (const auto& lt : trials) {
    auto& c = counts[lt.trial.participant_id];
    const bool ok = std::all_of(modalities.begin(), modalities.end(),
                                [&](Modality m) { return usable(lt.trial, m); });
    if (ok) ++c;
  }
  return {counts.begin(), counts.end()};
}

std::set<int> gate_participants(const std::vector<LabeledTrial>& trials,
                                const std::set<Modality>& modalities, int min_trials) {
  if (min_trials < 1) throw SpecError("min_trials must be at least 1");
  std::set<int> out;
  for (const auto& [pid, n] : usable_trial_counts(trials, modalities)) {
    if (n >= min_trials) out.insert(pid);
  }
  return out;
}

namespace {

void write_series_csv(const fs::path& file, const std::string& header,
                      const std::vector<const TimeSeries*>& parts) {
  std::ofstream out(file);
  if (!out) throw DataError(file.string(), 0, "cannot write file");
  out << header << '\n';
  const TimeSeries& first = *parts.front();
  for (Eigen::Index r = 0; r < first.samples(); ++r) {
    out << text::format_double(first.time_at(r));
    for (const TimeSeries* p : parts) {
      for (Eigen::Index c = 0; c < p->dims(); ++c) {
        const double v = p->values(r, c);
        out << ',' << (std::isnan(v) ? std::string() : text::format_double(v));
      }
    }
    out << '\n';
  }
}

}  // namespace

void write_eeg_csv(const fs::path& file, const RawEeg& eeg) {
  std::string header = "time";
  for (const auto& n : eeg.channel_names) header += "," + n;
  write_series_csv(file, header, {&eeg.series});
}

void write_gaze_csv(const fs::path& file, const RawGaze& gaze) {
  write_series_csv(file, "time,x,y,refx,refy", {&gaze.gaze_xy, &gaze.reference_xy});
}

void write_motion_csv(const fs::path& file, const RawMotion& motion) {
  write_series_csv(file, "time,x,y,z", {&motion.hand_xyz});
}

}  // namespace handover
