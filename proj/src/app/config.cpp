#include "handover/app/config.hpp"

#include "handover/core/rng.hpp"
#include "handover/core/text.hpp"

#include "handover/core/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace handover::app {

namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& origin, std::size_t line, const std::string& field,
                         const std::string& message)
    : Error(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + field + ": " + message),
      field_(field),
      line_(line) {}

namespace {

struct Ctx {
  const std::string& origin;
  std::size_t line;
  std::string field;

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(origin, line, field, msg); }

  double number(const std::string& v) const {
    const auto d = text::parse_double(v);
    if (!d) fail("expected a number, got '" + v + "'");
    return *d;
  }
  int integer(const std::string& v) const {
    const auto i = text::parse_int(v);
    if (!i) fail("expected an integer, got '" + v + "'");
    return static_cast<int>(*i);
  }
  bool boolean(const std::string& v) const {
    const std::string l = text::lower(v);
    if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
    if (l == "false" || l == "no" || l == "off" || l == "0") return false;
    fail("expected true or false, got '" + v + "'");
  }
  std::vector<std::string> list(const std::string& v) const {
    std::vector<std::string> out;
    for (auto& item : text::split(v, ',')) {
      auto t = text::trim(item);
      if (!t.empty()) out.emplace_back(t);
    }
    return out;
  }
  std::pair<double, double> interval(const std::string& v) const {
    const auto parts = text::split(v, ':');
    if (parts.size() != 2) fail("expected an interval 'start:end', got '" + v + "'");
    const double a = number(std::string(text::trim(parts[0])));
    const double b = number(std::string(text::trim(parts[1])));
    if (!(b > a)) fail("interval end must be after its start");
    return {a, b};
  }
  std::set<Modality> modalities(const std::string& v) const {
    std::set<Modality> out;
    for (const auto& m : list(v)) {
      try {
        out.insert(parse_modality(m));
      } catch (const Error& e) {
        fail(e.what());
      }
    }
    return out;
  }
};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string join_modalities(const std::set<Modality>& ms) {
  std::vector<std::string> names;
  for (Modality m : kAllModalities)
    if (ms.count(m)) names.emplace_back(to_string(m));
  return join(names);
}

std::string fmt(double v) { return text::format_double(v); }

}  // namespace

fs::path ExperimentConfig::manifest_path() const { return manifest.is_absolute() ? manifest : root / manifest; }

evaluation::Recipe ExperimentConfig::recipe_for(Modality modality) const {
  evaluation::Recipe r = model == evaluation::ModelKind::Lda ? evaluation::Recipe::lda_for(modality, standardize_all)
                                                             : evaluation::Recipe::lstm_for(modality);
  r.lda_shrinkage = lda_shrinkage;
  r.lda_solver = lda_solver;
  if (lstm_layers) r.lstm.layers = *lstm_layers;
  if (lstm_hidden) r.lstm.hidden = *lstm_hidden;
  if (lstm_batch_size) r.lstm.batch_size = *lstm_batch_size;
  if (lstm_max_epochs) r.lstm.max_epochs = *lstm_max_epochs;
  if (lstm_early_stop_after) {
    if (*lstm_early_stop_after < 0) r.lstm.early_stop_after.reset();
    else r.lstm.early_stop_after = *lstm_early_stop_after;
  }
  if (lstm_patience) r.lstm.patience = *lstm_patience;
  if (lstm_learning_rate) r.lstm.learning_rate = *lstm_learning_rate;
  if (lstm_clip_norm) r.lstm.clip_norm = *lstm_clip_norm;
  return r;
}

evaluation::CvScheme ExperimentConfig::scheme_for(int participant_id) const {
  const std::uint64_t s = derive_seed(seed.value_or(0), {static_cast<std::uint64_t>(participant_id)});
  auto scheme = model == evaluation::ModelKind::Lstm ? evaluation::CvScheme::nested(cv_k, cv_repeats, cv_inner_k, s)
                                                     : evaluation::CvScheme::repeated(cv_k, cv_repeats, s);
  scheme.require_both_classes_per_fold = require_both_classes_per_fold;
  return scheme;
}

std::vector<fusion::FusionSpec> ExperimentConfig::fusion_specs() const {
  std::vector<fusion::FusionSpec> out;
  for (auto mode : fusion_modes) {
    fusion::FusionSpec s;
    s.mode = mode;
    s.modalities = fusion_modalities;
    s.eeg_pca_target = fusion_eeg_pca_target;
    s.standardize_all = standardize_all;
    out.push_back(s);
  }
  return out;
}

ExperimentConfig parse_config_text(const std::string& content, const std::string& origin, const fs::path& base_dir) {
  ExperimentConfig cfg;
  cfg.origin = origin;
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
  double freq_min = 5.0, freq_max = 40.0, freq_step = 1.0;
  bool freqs_set = false;

  std::istringstream in(content);
  std::string raw;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line(text::trim(raw));
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin, lineno, "section", "unterminated section header");
      section = text::lower(std::string(text::trim(line.substr(1, line.size() - 2))));
      static const std::set<std::string> known{"dataset", "experiment", "cv",     "windows", "features", "lda",
                                               "lstm",    "fusion",     "levels", "neuro",   "output",   "meta"};
      if (!known.count(section)) throw ConfigError(origin, lineno, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin, lineno, section.empty() ? "line" : section, "expected key = value");
    const std::string key = text::lower(std::string(text::trim(line.substr(0, eq))));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (section.empty()) throw ConfigError(origin, lineno, key, "key outside of any section");
    if (section == "meta") continue;
    const Ctx c{origin, lineno, section + "." + key};
    if (cfg.key_lines.count(c.field)) c.fail("duplicate key");
    cfg.key_lines[c.field] = lineno;

    const std::map<std::string, std::function<void()>> handlers{
        {"dataset.root", [&] { cfg.root = resolve(value); }},
        {"dataset.manifest", [&] { cfg.manifest = value; }},
        {"experiment.modalities", [&] { cfg.modalities = c.modalities(value); }},
        {"experiment.model",
         [&] {
           try {
             cfg.model = evaluation::parse_model_kind(value);
           } catch (const Error& e) {
             c.fail(e.what());
           }
         }},
        {"experiment.seed",
         [&] {
           std::uint64_t s = 0;
           const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
           if (ec != std::errc() || p != value.data() + value.size()) c.fail("expected a nonnegative integer seed");
           cfg.seed = s;
         }},
        {"experiment.min_trials_single", [&] { cfg.min_trials_single = c.integer(value); }},
        {"experiment.min_trials_fusion", [&] { cfg.min_trials_fusion = c.integer(value); }},
        {"cv.k", [&] { cfg.cv_k = c.integer(value); }},
        {"cv.repeats", [&] { cfg.cv_repeats = c.integer(value); }},
        {"cv.inner_k", [&] { cfg.cv_inner_k = c.integer(value); }},
        {"cv.require_both_classes_per_fold", [&] { cfg.require_both_classes_per_fold = c.boolean(value); }},
        {"windows.start", [&] { cfg.grid.start = c.number(value); }},
        {"windows.first_end", [&] { cfg.grid.first_end = c.number(value); }},
        {"windows.last_end", [&] { cfg.grid.last_end = c.number(value); }},
        {"windows.step", [&] { cfg.grid.step = c.number(value); }},
        {"features.eeg_channels", [&] { cfg.eeg.channels = c.list(value); }},
        {"features.tf_freq_min", [&] { freq_min = c.number(value); freqs_set = true; }},
        {"features.tf_freq_max", [&] { freq_max = c.number(value); freqs_set = true; }},
        {"features.tf_freq_step", [&] { freq_step = c.number(value); freqs_set = true; }},
        {"features.n_cycles", [&] { cfg.eeg.tf.n_cycles = c.number(value); }},
        {"features.tf_step_s", [&] { cfg.eeg.tf.output_step_s = c.number(value); }},
        {"features.power_scale",
         [&] {
           const auto v = text::lower(value);
           if (v == "raw") cfg.eeg.scale = features::PowerScale::Raw;
           else if (v == "log") cfg.eeg.scale = features::PowerScale::Log;
           else c.fail("expected raw or log");
         }},
        {"features.eeg_preprocess", [&] { cfg.eeg.preprocess = c.boolean(value); }},
        {"features.eeg_target_rate_hz", [&] { cfg.eeg.target_rate_hz = c.number(value); }},
        {"features.standardize_all", [&] { cfg.standardize_all = c.boolean(value); }},
        {"features.cache_dir", [&] { cfg.cache_dir = resolve(value); }},
        {"lda.shrinkage", [&] { cfg.lda_shrinkage = c.number(value); }},
        {"lda.solver",
         [&] {
           const auto v = text::lower(value);
           if (v == "auto") cfg.lda_solver = classifiers::LdaSolver::Auto;
           else if (v == "primal") cfg.lda_solver = classifiers::LdaSolver::Primal;
           else if (v == "dual") cfg.lda_solver = classifiers::LdaSolver::Dual;
           else c.fail("expected auto, primal or dual");
         }},
        {"lstm.layers", [&] { cfg.lstm_layers = c.integer(value); }},
        {"lstm.hidden", [&] { cfg.lstm_hidden = c.integer(value); }},
        {"lstm.batch_size", [&] { cfg.lstm_batch_size = c.integer(value); }},
        {"lstm.max_epochs", [&] { cfg.lstm_max_epochs = c.integer(value); }},
        {"lstm.early_stop_after",
         [&] { cfg.lstm_early_stop_after = text::lower(value) == "none" ? -1 : c.integer(value); }},
        {"lstm.patience", [&] { cfg.lstm_patience = c.integer(value); }},
        {"lstm.learning_rate", [&] { cfg.lstm_learning_rate = c.number(value); }},
        {"lstm.clip_norm", [&] { cfg.lstm_clip_norm = c.number(value); }},
        {"fusion.modes",
         [&] {
           cfg.fusion_modes.clear();
           for (const auto& m : c.list(text::lower(value))) {
             if (m == "early") cfg.fusion_modes.push_back(fusion::FusionMode::Early);
             else if (m == "late") cfg.fusion_modes.push_back(fusion::FusionMode::Late);
             else if (m != "none") c.fail("expected early, late or none, got '" + m + "'");
           }
         }},
        {"fusion.modalities", [&] { cfg.fusion_modalities = c.modalities(value); }},
        {"fusion.eeg_pca_target", [&] { cfg.fusion_eeg_pca_target = c.number(value); }},
        {"levels.levels",
         [&] {
           cfg.levels.clear();
           for (const auto& l : c.list(value)) cfg.levels.push_back(c.number(l));
         }},
        {"levels.run_length", [&] { cfg.run_length = c.integer(value); }},
        {"neuro.enabled", [&] { cfg.neuro.enabled = c.boolean(value); }},
        {"neuro.zones_file", [&] { cfg.neuro.zones_file = resolve(value); }},
        {"neuro.zone_intervals",
         [&] {
           cfg.neuro.zone_intervals.clear();
           for (const auto& iv : c.list(value)) cfg.neuro.zone_intervals.push_back(c.interval(iv));
         }},
        {"neuro.erp_channels", [&] { cfg.neuro.erp_channels = c.list(value); }},
        {"neuro.erp_baseline",
         [&] { std::tie(cfg.neuro.erp_baseline_start, cfg.neuro.erp_baseline_end) = c.interval(value); }},
        {"neuro.erds_channel", [&] { cfg.neuro.erds_channel = value; }},
        {"neuro.erds_baseline",
         [&] { std::tie(cfg.neuro.erds_baseline_start, cfg.neuro.erds_baseline_end) = c.interval(value); }},
        {"neuro.band_test_interval",
         [&] { std::tie(cfg.neuro.band_test_start, cfg.neuro.band_test_end) = c.interval(value); }},
        {"output.dir", [&] { cfg.out_dir = resolve(value); }},
    };
    const auto h = handlers.find(c.field);
    if (h == handlers.end()) c.fail("unknown key");
    h->second();
  }
  if (freqs_set) {
    const std::size_t line = cfg.key_lines.count("features.tf_freq_step") ? cfg.key_lines["features.tf_freq_step"]
                             : cfg.key_lines.count("features.tf_freq_max") ? cfg.key_lines["features.tf_freq_max"]
                                                                            : cfg.key_lines["features.tf_freq_min"];
    if (!(freq_step > 0.0) || !(freq_max >= freq_min) || !(freq_min > 0.0)) {
      throw ConfigError(origin, line, "features.tf_freq_*", "need 0 < tf_freq_min <= tf_freq_max and tf_freq_step > 0");
    }
    cfg.eeg.tf.freqs_hz.clear();
    const auto n = static_cast<int>(std::floor((freq_max - freq_min) / freq_step + 1e-9));
    for (int i = 0; i <= n; ++i) cfg.eeg.tf.freqs_hz.push_back(freq_min + i * freq_step);
  }
  return cfg;
}

ExperimentConfig parse_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), 0, "config", "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), file.string(), file.parent_path());
}

void validate_config(const ExperimentConfig& cfg) {
  auto fail = [&](const std::string& field, const std::string& msg) {
    const auto it = cfg.key_lines.find(field);
    throw ConfigError(cfg.origin, it == cfg.key_lines.end() ? 0 : it->second, field, msg);
  };
  if (!cfg.seed) fail("experiment.seed", "a seed is required");
  if (cfg.modalities.empty() && cfg.fusion_modes.empty() && !cfg.neuro.enabled) {
    fail("experiment.modalities", "nothing to run: no modalities, fusion or neuro analyses requested");
  }
  if (cfg.root.empty()) fail("dataset.root", "dataset root is required");
  if (!fs::is_directory(cfg.root)) fail("dataset.root", "directory does not exist: " + cfg.root.string());
  if (!fs::is_regular_file(cfg.manifest_path())) fail("dataset.manifest", "manifest not found: " + cfg.manifest_path().string());
  if (cfg.min_trials_single < 0) fail("experiment.min_trials_single", "must be nonnegative");
  if (cfg.min_trials_fusion < 1) fail("experiment.min_trials_fusion", "must be at least 1");

  if (cfg.cv_k < 2) fail("cv.k", "must be at least 2");
  if (cfg.cv_repeats < 1) fail("cv.repeats", "must be at least 1");
  if (cfg.cv_inner_k < 2) fail("cv.inner_k", "must be at least 2");

  try {
    cfg.grid.validate();
  } catch (const SpecError& e) {
    std::string field = "windows.step";
    for (const char* f : {"windows.last_end", "windows.first_end", "windows.start", "windows.step"})
      if (cfg.key_lines.count(f)) field = f;
    const std::string m = e.what();
    if (m.find("step") != std::string::npos) field = "windows.step";
    else if (m.find("first") != std::string::npos) field = "windows.first_end";
    else if (m.find("last") != std::string::npos) field = "windows.last_end";
    fail(field, m);
  }
  if (cfg.grid.start < kEpochStart - 1e-9 || cfg.grid.last_end > kEpochEnd + 1e-9) {
    fail(cfg.key_lines.count("windows.last_end") ? "windows.last_end" : "windows.start",
         "windows must stay inside the analysis epoch [-5, 6) s");
  }

  if (cfg.eeg.channels.empty()) fail("features.eeg_channels", "at least one channel is required");
  try {
    cfg.eeg.tf.validate(cfg.eeg.target_rate_hz);
  } catch (const SpecError& e) {
    fail("features.tf_freq_max", e.what());
  }
  if (!(cfg.eeg.target_rate_hz > 0.0)) fail("features.eeg_target_rate_hz", "must be positive");
  if (cfg.cache_dir && fs::exists(*cfg.cache_dir) && !fs::is_directory(*cfg.cache_dir)) {
    fail("features.cache_dir", "exists and is not a directory");
  }

  if (!(cfg.lda_shrinkage >= 0.0 && cfg.lda_shrinkage <= 1.0)) fail("lda.shrinkage", "must lie in [0, 1]");
  if (cfg.model == evaluation::ModelKind::Lstm) {
    for (Modality m : cfg.modalities) {
      try {
        cfg.recipe_for(m).lstm.validate();
      } catch (const SpecError& e) {
        fail("lstm", e.what());
      }
    }
  }

  if (!cfg.fusion_modes.empty()) {
    if (cfg.fusion_modalities.size() < 2) fail("fusion.modalities", "fusion needs at least two modalities");
    if (!(cfg.fusion_eeg_pca_target > 0.0 && cfg.fusion_eeg_pca_target <= 1.0)) {
      fail("fusion.eeg_pca_target", "must lie in (0, 1]");
    }
  }
  if (cfg.levels.empty()) fail("levels.levels", "at least one level is required");
  for (double l : cfg.levels)
    if (!(l > 0.0 && l <= 1.0)) fail("levels.levels", "levels must lie in (0, 1]");
  if (cfg.run_length < 1) fail("levels.run_length", "must be at least 1");

  if (cfg.neuro.zones_file && !fs::is_regular_file(*cfg.neuro.zones_file)) {
    fail("neuro.zones_file", "file not found: " + cfg.neuro.zones_file->string());
  }
  if (cfg.out_dir.empty()) fail("output.dir", "output directory is required");
}

std::string to_config_text(const ExperimentConfig& cfg, bool include_output) {
  std::ostringstream o;
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  o << "[dataset]\nroot = " << fs::absolute(cfg.root).lexically_normal().string() << "\nmanifest = " << cfg.manifest.string() << "\n\n";
  o << "[experiment]\nmodalities = " << join_modalities(cfg.modalities)
    << "\nmodel = " << evaluation::to_string(cfg.model) << "\n";
  if (cfg.seed) o << "seed = " << *cfg.seed << "\n";
  o << "min_trials_single = " << cfg.min_trials_single << "\nmin_trials_fusion = " << cfg.min_trials_fusion << "\n\n";
  o << "[cv]\nk = " << cfg.cv_k << "\nrepeats = " << cfg.cv_repeats << "\ninner_k = " << cfg.cv_inner_k
    << "\nrequire_both_classes_per_fold = " << (cfg.require_both_classes_per_fold ? "true" : "false") << "\n\n";
  o << "[windows]\nstart = " << fmt(cfg.grid.start) << "\nfirst_end = " << fmt(cfg.grid.first_end)
    << "\nlast_end = " << fmt(cfg.grid.last_end) << "\nstep = " << fmt(cfg.grid.step) << "\n\n";
  const auto& f = cfg.eeg.tf.freqs_hz;
  o << "[features]\neeg_channels = " << join(cfg.eeg.channels) << "\n";
  if (!f.empty()) {
    o << "tf_freq_min = " << fmt(f.front()) << "\ntf_freq_max = " << fmt(f.back())
      << "\ntf_freq_step = " << fmt(f.size() > 1 ? f[1] - f[0] : 1.0) << "\n";
  }
  o << "n_cycles = " << fmt(cfg.eeg.tf.n_cycles) << "\ntf_step_s = " << fmt(cfg.eeg.tf.output_step_s)
    << "\npower_scale = " << (cfg.eeg.scale == features::PowerScale::Log ? "log" : "raw")
    << "\neeg_preprocess = " << (cfg.eeg.preprocess ? "true" : "false")
    << "\neeg_target_rate_hz = " << fmt(cfg.eeg.target_rate_hz)
    << "\nstandardize_all = " << (cfg.standardize_all ? "true" : "false") << "\n";
  if (cfg.cache_dir) o << "cache_dir = " << fs::absolute(*cfg.cache_dir).lexically_normal().string() << "\n";
  o << "\n[lda]\nshrinkage = " << fmt(cfg.lda_shrinkage) << "\nsolver = "
    << (cfg.lda_solver == classifiers::LdaSolver::Auto     ? "auto"
        : cfg.lda_solver == classifiers::LdaSolver::Primal ? "primal"
                                                           : "dual")
    << "\n\n[lstm]\n";
  if (cfg.lstm_layers) o << "layers = " << opt_int(cfg.lstm_layers) << "\n";
  if (cfg.lstm_hidden) o << "hidden = " << opt_int(cfg.lstm_hidden) << "\n";
  if (cfg.lstm_batch_size) o << "batch_size = " << opt_int(cfg.lstm_batch_size) << "\n";
  if (cfg.lstm_max_epochs) o << "max_epochs = " << opt_int(cfg.lstm_max_epochs) << "\n";
  if (cfg.lstm_early_stop_after) {
    o << "early_stop_after = " << (*cfg.lstm_early_stop_after < 0 ? "none" : std::to_string(*cfg.lstm_early_stop_after)) << "\n";
  }
  if (cfg.lstm_patience) o << "patience = " << opt_int(cfg.lstm_patience) << "\n";
  if (cfg.lstm_learning_rate) o << "learning_rate = " << fmt(*cfg.lstm_learning_rate) << "\n";
  if (cfg.lstm_clip_norm) o << "clip_norm = " << fmt(*cfg.lstm_clip_norm) << "\n";
  std::vector<std::string> modes;
  for (auto m : cfg.fusion_modes) modes.emplace_back(m == fusion::FusionMode::Early ? "early" : "late");
  o << "\n[fusion]\nmodes = " << (modes.empty() ? "none" : join(modes))
    << "\nmodalities = " << join_modalities(cfg.fusion_modalities)
    << "\neeg_pca_target = " << fmt(cfg.fusion_eeg_pca_target) << "\n\n";
  std::vector<std::string> levels;
  for (double l : cfg.levels) levels.push_back(fmt(l));
  o << "[levels]\nlevels = " << join(levels) << "\nrun_length = " << cfg.run_length << "\n\n";
  const auto& n = cfg.neuro;
  std::vector<std::string> ivs;
  for (const auto& [a, b] : n.zone_intervals) ivs.push_back(fmt(a) + ":" + fmt(b));
  o << "[neuro]\nenabled = " << (n.enabled ? "true" : "false") << "\n";
  if (n.zones_file) o << "zones_file = " << fs::absolute(*n.zones_file).lexically_normal().string() << "\n";
  o << "zone_intervals = " << join(ivs) << "\n";
  if (!n.erp_channels.empty()) o << "erp_channels = " << join(n.erp_channels) << "\n";
  o << "erp_baseline = " << fmt(n.erp_baseline_start) << ":" << fmt(n.erp_baseline_end)
    << "\nerds_channel = " << n.erds_channel << "\nerds_baseline = " << fmt(n.erds_baseline_start) << ":"
    << fmt(n.erds_baseline_end) << "\nband_test_interval = " << fmt(n.band_test_start) << ":" << fmt(n.band_test_end)
    << "\n\n";
  if (include_output) o << "[output]\ndir = " << fs::absolute(cfg.out_dir).lexically_normal().string() << "\n";
  return o.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) { return text::fnv1a(to_config_text(config, false)); }

}  // namespace handover::app
