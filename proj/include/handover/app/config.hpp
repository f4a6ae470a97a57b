#pragma once

#include "handover/classifiers/lda.hpp"
#include "handover/classifiers/lstm.hpp"
#include "handover/core/error.hpp"
#include "handover/evaluation/sweep.hpp"
#include "handover/features/features.hpp"
#include "handover/fusion/fusion.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace handover::app {

/// Invalid configuration: names the field and, when known, the line it came from.
class ConfigError : public Error {
public:
  ConfigError(const std::string& origin, std::size_t line, const std::string& field, const std::string& message);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

private:
  std::string field_;
  std::size_t line_;
};

struct NeuroConfig {
  bool enabled = false;
  std::optional<std::filesystem::path> zones_file;  // default zone map when unset
  std::vector<std::pair<double, double>> zone_intervals{{-5.0, 0.0}, {0.0, 6.0}};
  std::vector<std::string> erp_channels;
  double erp_baseline_start = -5.0;
  double erp_baseline_end = -4.5;
  std::string erds_channel = "Cz";
  double erds_baseline_start = -4.0;
  double erds_baseline_end = -3.0;
  double band_test_start = -2.0;
  double band_test_end = 0.0;
};

struct ExperimentConfig {
  // [dataset]
  std::filesystem::path root;
  std::filesystem::path manifest = "manifest.txt";  // relative to root unless absolute

  // [experiment]
  std::set<Modality> modalities;
  evaluation::ModelKind model = evaluation::ModelKind::Lda;
  std::optional<std::uint64_t> seed;
  int min_trials_single = 0;  // 0: only what the CV scheme needs
  int min_trials_fusion = 60;

  // [cv]
  int cv_k = 10;
  int cv_repeats = 3;
  int cv_inner_k = 10;
  bool require_both_classes_per_fold = true;

  // [windows]
  features::WindowGrid grid;

  // [features]
  features::EegOptions eeg;
  bool standardize_all = false;
  std::optional<std::filesystem::path> cache_dir;

  // [lda]
  double lda_shrinkage = 1e-4;
  classifiers::LdaSolver lda_solver = classifiers::LdaSolver::Auto;

  // [lstm]: overrides of the per-modality recipes
  std::optional<int> lstm_layers, lstm_hidden, lstm_batch_size, lstm_max_epochs, lstm_early_stop_after,
      lstm_patience;
  std::optional<double> lstm_learning_rate, lstm_clip_norm;

  // [fusion]
  std::vector<fusion::FusionMode> fusion_modes;
  std::set<Modality> fusion_modalities;
  double fusion_eeg_pca_target = 0.99;

  // [levels]
  std::vector<double> levels = evaluation::default_levels();
  int run_length = 3;

  // [neuro]
  NeuroConfig neuro;

  // [output]
  std::filesystem::path out_dir = "results";

  /// Line of each "section.key" in the source text, for validation messages.
  std::map<std::string, std::size_t> key_lines;
  std::string origin = "<config>";

  std::filesystem::path manifest_path() const;
  evaluation::Recipe recipe_for(Modality modality) const;
  evaluation::CvScheme scheme_for(int participant_id) const;
  std::vector<fusion::FusionSpec> fusion_specs() const;
};

/// Parses the sectioned key = value format. Relative paths resolve against `base_dir`.
/// Throws ConfigError naming the line and field. Section [meta] is ignored so run
/// metadata files can be replayed as configs.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin,
                                   const std::filesystem::path& base_dir);
ExperimentConfig parse_config(const std::filesystem::path& file);

/// Semantic checks, including that referenced paths exist. Throws ConfigError.
void validate_config(const ExperimentConfig& config);

/// Canonical text form; parsing it yields an equivalent config.
std::string to_config_text(const ExperimentConfig& config, bool include_output = true);
/// Hash of the canonical text without the output section, so the same experiment
/// written to different directories keeps its identity.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace handover::app
