#include "handover/app/synth.hpp"

#include "handover/app/config.hpp"
#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/rng.hpp"
#include "handover/core/text.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace handover::app {

namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

Eigen::Index sample_count(const SynthProfile& p, double rate) {
  return static_cast<Eigen::Index>(std::llround((p.stream_end_s - p.stream_start_s) * rate));
}

double ramp(double t, double start, double duration) {
  if (t < start) return 0.0;
  return std::min(1.0, (t - start) / duration);
}

bool is_central(const std::string& ch) {
  return ch.starts_with("C") || ch.starts_with("FC") || ch.starts_with("CP");
}

RawGaze make_gaze(const SynthProfile& p, Rng& rng, bool handover) {
  const double step = 1.0 / p.gaze_rate_hz;
  const Eigen::Index n = sample_count(p, p.gaze_rate_hz);
  Matrix gaze(n, 2), ref(n, 2);
  // Workspace fixation point relative to the torso reference.
  const double bx = rng.normal(0.0, 250.0);
  const double by = rng.normal(300.0, 80.0);
  const double sway_phase = rng.uniform(0.0, 2.0 * pi);
  double ex = 0.0, ey = 0.0;
  constexpr double rho = 0.5;
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = p.stream_start_s + static_cast<double>(i) * step;
    ref(i, 0) = 960.0 + 5.0 * std::sin(2.0 * pi * 0.2 * t + sway_phase);
    ref(i, 1) = 540.0 + 3.0 * std::cos(2.0 * pi * 0.2 * t + sway_phase);
    ex = rho * ex + innovation * rng.normal(0.0, p.gaze.noise);
    ey = rho * ey + innovation * rng.normal(0.0, p.gaze.noise);
    const double pull = handover ? p.gaze.effect * ramp(t, p.gaze.injection_s, 0.2) : 0.0;
    gaze(i, 0) = ref(i, 0) + bx * (1.0 - pull) + ex;
    gaze(i, 1) = ref(i, 1) + by * (1.0 - pull) + ey;
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (rng.uniform() < p.gaze_dropout) gaze.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  RawGaze g;
  g.gaze_xy = TimeSeries(p.stream_start_s, step, gaze);
  g.reference_xy = TimeSeries(p.stream_start_s, step, ref);
  return g;
}

RawEeg make_eeg(const SynthProfile& p, Rng& rng, bool handover) {
  const double step = 1.0 / p.eeg_rate_hz;
  const Eigen::Index n = sample_count(p, p.eeg_rate_hz);
  const auto channels = static_cast<Eigen::Index>(p.eeg_channels.size());
  Matrix x(n, channels);
  constexpr double rho = 0.9;
  for (Eigen::Index c = 0; c < channels; ++c) {
    const bool central = is_central(p.eeg_channels[static_cast<std::size_t>(c)]);
    const double mu_phase = rng.uniform(0.0, 2.0 * pi);
    const double beta_phase = rng.uniform(0.0, 2.0 * pi);
    double ar = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = p.stream_start_s + static_cast<double>(i) * step;
      ar = rho * ar + std::sqrt(1.0 - rho * rho) * rng.normal(0.0, p.eeg.noise);
      const double erd = handover && central ? p.eeg.effect * ramp(t, p.eeg.injection_s, 0.3) : 0.0;
      const double amp = p.eeg.noise * (1.0 - erd);
      x(i, c) = ar + amp * std::sin(2.0 * pi * 10.0 * t + mu_phase) + 0.5 * amp * std::sin(2.0 * pi * 20.0 * t + beta_phase);
    }
  }
  RawEeg e;
  e.channel_names = p.eeg_channels;
  e.series = TimeSeries(p.stream_start_s, step, x);
  return e;
}

RawMotion make_motion(const SynthProfile& p, Rng& rng, bool handover) {
  const double step = 1.0 / p.motion_rate_hz;
  const Eigen::Index n = sample_count(p, p.motion_rate_hz);
  Matrix x(n, 3);
  const double reach = rng.normal(0.3, 0.03);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = p.stream_start_s + static_cast<double>(i) * step;
    const double s = ramp(t, 0.0, 1.5);
    const double progress = s * s * (3.0 - 2.0 * s);
    const double side = handover ? p.motion.effect * ramp(t, p.motion.injection_s, 0.6) : 0.0;
    x(i, 0) = 0.3 + reach * progress + rng.normal(0.0, p.motion.noise);
    x(i, 1) = side + rng.normal(0.0, p.motion.noise);
    x(i, 2) = 0.1 + 0.1 * progress + rng.normal(0.0, p.motion.noise);
  }
  RawMotion m;
  m.hand_xyz = TimeSeries(p.stream_start_s, step, x);
  return m;
}

}  // namespace

void SynthProfile::validate() const {
  if (participants < 1) throw SpecError("synth: participants must be at least 1");
  if (trials_per_condition < 1) throw SpecError("synth: trials_per_condition must be at least 1");
  if (modalities.empty()) throw SpecError("synth: no modalities requested");
  if (!(stream_start_s <= kEpochStart - 0.5 && stream_end_s >= kEpochEnd + 0.5)) {
    throw SpecError("synth: streams must extend at least 0.5 s beyond the analysis epoch on both sides");
  }
  for (double r : {eeg_rate_hz, gaze_rate_hz, motion_rate_hz})
    if (!(r > 0.0)) throw SpecError("synth: rates must be positive");
  if (!(gaze_dropout >= 0.0 && gaze_dropout < 0.5)) throw SpecError("synth: gaze_dropout must lie in [0, 0.5)");
  if (!(gaze.effect >= 0.0 && gaze.effect <= 1.0)) throw SpecError("synth: gaze effect is a fraction in [0, 1]");
  if (!(eeg.effect >= 0.0 && eeg.effect <= 1.0)) throw SpecError("synth: EEG effect is a fraction in [0, 1]");
  if (eeg_channels.empty()) throw SpecError("synth: no EEG channels");
}

TrialRecording synthesize_trial(const SynthProfile& p, int participant, int trial, Condition condition) {
  TrialRecording t;
  t.participant_id = participant;
  t.trial_id = trial;
  t.condition = condition;
  t.onset_time_s = 0.0;
  const bool handover = label_of(condition) == 1;
  const auto base = derive_seed(p.seed, {static_cast<std::uint64_t>(participant), static_cast<std::uint64_t>(trial)});
  if (p.modalities.count(Modality::Eeg)) {
    Rng rng(derive_seed(base, {0}));
    t.eeg = make_eeg(p, rng, handover);
  }
  if (p.modalities.count(Modality::Gaze)) {
    Rng rng(derive_seed(base, {1}));
    t.gaze = make_gaze(p, rng, handover);
  }
  if (p.modalities.count(Modality::Motion)) {
    Rng rng(derive_seed(base, {2}));
    t.motion = make_motion(p, rng, handover);
  }
  return t;
}

namespace {

// Condition of every trial id of a participant: balanced, in shuffled order.
std::vector<Condition> condition_order(const SynthProfile& p, int participant) {
  std::vector<Condition> order;
  for (int i = 0; i < p.trials_per_condition; ++i)
    for (Condition c : {Condition::Solo, Condition::Handover, Condition::Joint}) order.push_back(c);
  Rng rng(derive_seed(p.seed, {0xc0, static_cast<std::uint64_t>(participant)}));
  rng.shuffle(order);
  return order;
}

}  // namespace

std::vector<TrialRecording> synthesize(const SynthProfile& p) {
  p.validate();
  std::vector<TrialRecording> out;
  for (int pid = 1; pid <= p.participants; ++pid) {
    const auto order = condition_order(p, pid);
    for (std::size_t i = 0; i < order.size(); ++i) out.push_back(synthesize_trial(p, pid, static_cast<int>(i + 1), order[i]));
  }
  return out;
}

void write_synthetic_dataset(const SynthProfile& p, const fs::path& out_dir) {
  p.validate();
  fs::create_directories(out_dir);
  DatasetManifest manifest;
  if (p.modalities.count(Modality::Eeg)) {
    manifest.eeg_rate_hz = p.eeg_rate_hz;
    manifest.eeg_channels = p.eeg_channels;
  }
  if (p.modalities.count(Modality::Gaze)) manifest.gaze_rate_hz = p.gaze_rate_hz;
  if (p.modalities.count(Modality::Motion)) manifest.motion_rate_hz = p.motion_rate_hz;

  char buf[64];
  for (int pid = 1; pid <= p.participants; ++pid) {
    std::snprintf(buf, sizeof buf, "p%02d", pid);
    const std::string dir = buf;
    fs::create_directories(out_dir / dir);
    const auto order = condition_order(p, pid);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const int tid = static_cast<int>(i + 1);
      const TrialRecording t = synthesize_trial(p, pid, tid, order[i]);
      std::snprintf(buf, sizeof buf, "t%03d", tid);
      const std::string stem = dir + "/" + buf;
      ManifestEntry e;
      e.participant_id = pid;
      e.trial_id = tid;
      e.condition = order[i];
      e.onset_s = 0.0;
      if (t.eeg) {
        e.eeg_path = stem + "_eeg.csv";
        write_eeg_csv(out_dir / e.eeg_path, *t.eeg);
      }
      if (t.gaze) {
        e.gaze_path = stem + "_gaze.csv";
        write_gaze_csv(out_dir / e.gaze_path, *t.gaze);
      }
      if (t.motion) {
        e.motion_path = stem + "_motion.csv";
        write_motion_csv(out_dir / e.motion_path, *t.motion);
      }
      manifest.trials.push_back(e);
    }
  }
  write_manifest(out_dir / "manifest.txt", manifest);
  std::ofstream truth(out_dir / "ground_truth.txt");
  truth << "# Generator profile; class signal is present only after each injection time.\n" << to_profile_text(p);
}

// ---- profile text ----

SynthProfile parse_synth_profile_text(const std::string& content, const std::string& origin) {
  SynthProfile p;
  std::istringstream in(content);
  std::string raw, section;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line(text::trim(raw));
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = text::lower(std::string(text::trim(line.substr(1, line.size() - 2))));
      if (section != "synth" && section != "eeg" && section != "gaze" && section != "motion") {
        throw ConfigError(origin, lineno, section, "unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) throw ConfigError(origin, lineno, "line", "expected key = value inside a section");
    const std::string key = text::lower(std::string(text::trim(line.substr(0, eq))));
    const std::string value(text::trim(line.substr(eq + 1)));
    const std::string field = section + "." + key;
    auto number = [&] {
      const auto d = text::parse_double(value);
      if (!d) throw ConfigError(origin, lineno, field, "expected a number, got '" + value + "'");
      return *d;
    };
    auto integer = [&] {
      const auto i = text::parse_int(value);
      if (!i) throw ConfigError(origin, lineno, field, "expected an integer, got '" + value + "'");
      return static_cast<int>(*i);
    };
    if (section == "synth") {
      if (key == "participants") p.participants = integer();
      else if (key == "trials_per_condition") p.trials_per_condition = integer();
      else if (key == "seed") p.seed = static_cast<std::uint64_t>(number());
      else if (key == "modalities") {
        p.modalities.clear();
        for (const auto& m : text::split(value, ',')) {
          const std::string name(text::trim(m));
          if (name.empty()) continue;
          try {
            p.modalities.insert(parse_modality(name));
          } catch (const Error& e) {
            throw ConfigError(origin, lineno, field, e.what());
          }
        }
      } else if (key == "eeg_rate_hz") p.eeg_rate_hz = number();
      else if (key == "gaze_rate_hz") p.gaze_rate_hz = number();
      else if (key == "motion_rate_hz") p.motion_rate_hz = number();
      else if (key == "stream_start_s") p.stream_start_s = number();
      else if (key == "stream_end_s") p.stream_end_s = number();
      else if (key == "gaze_dropout") p.gaze_dropout = number();
      else if (key == "eeg_channels") {
        p.eeg_channels.clear();
        for (const auto& c : text::split(value, ',')) {
          const std::string name(text::trim(c));
          if (!name.empty()) p.eeg_channels.push_back(name);
        }
      } else throw ConfigError(origin, lineno, field, "unknown key");
    } else {
      ModalitySignal& s = section == "eeg" ? p.eeg : section == "gaze" ? p.gaze : p.motion;
      if (key == "injection_s") s.injection_s = number();
      else if (key == "effect") s.effect = number();
      else if (key == "noise") s.noise = number();
      else throw ConfigError(origin, lineno, field, "unknown key");
    }
  }
  try {
    p.validate();
  } catch (const SpecError& e) {
    throw ConfigError(origin, lineno, "synth", e.what());
  }
  return p;
}

SynthProfile parse_synth_profile(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), 0, "profile", "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synth_profile_text(ss.str(), file.string());
}

std::string to_profile_text(const SynthProfile& p) {
  std::ostringstream o;
  auto f = [](double v) { return text::format_double(v); };
  std::string mods, chans;
  for (Modality m : kAllModalities)
    if (p.modalities.count(m)) mods += (mods.empty() ? "" : ", ") + std::string(to_string(m));
  for (const auto& c : p.eeg_channels) chans += (chans.empty() ? "" : ", ") + c;
  o << "[synth]\nparticipants = " << p.participants << "\ntrials_per_condition = " << p.trials_per_condition
    << "\nseed = " << p.seed << "\nmodalities = " << mods << "\neeg_rate_hz = " << f(p.eeg_rate_hz)
    << "\ngaze_rate_hz = " << f(p.gaze_rate_hz) << "\nmotion_rate_hz = " << f(p.motion_rate_hz)
    << "\nstream_start_s = " << f(p.stream_start_s) << "\nstream_end_s = " << f(p.stream_end_s)
    << "\ngaze_dropout = " << f(p.gaze_dropout) << "\neeg_channels = " << chans << "\n";
  for (const auto& [name, s] : {std::pair{"eeg", p.eeg}, std::pair{"gaze", p.gaze}, std::pair{"motion", p.motion}}) {
    o << "\n[" << name << "]\ninjection_s = " << f(s.injection_s) << "\neffect = " << f(s.effect)
      << "\nnoise = " << f(s.noise) << "\n";
  }
  return o.str();
}

}  // namespace handover::app
