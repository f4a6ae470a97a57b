#pragma once

#include "handover/app/config.hpp"
#include "handover/evaluation/timeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace handover::app {

struct RunOptions {
  int jobs = 1;
  std::ostream* log = nullptr;  // progress notes; nothing is logged when null
};

/// Why a participant was or was not analysed for one modality set.
struct GateRecord {
  int participant_id = 0;
  std::string tag;
  int usable_trials = 0;
  int handover = 0;
  int non_handover = 0;
  bool included = false;
  std::string reason;
};

struct RunError {
  int participant_id = 0;
  std::string tag;
  std::string model;
  double window_end_s = 0.0;
  std::string message;
};

struct RunSummary {
  std::vector<evaluation::AucTimeline> timelines;
  std::vector<GateRecord> gating;
  std::vector<RunError> errors;
  std::vector<std::filesystem::path> written;

  /// 0 when every window of every timeline was evaluated, 1 otherwise.
  int exit_code() const { return errors.empty() ? 0 : 1; }
};

/// Runs the configured sweeps on already loaded trials and writes all outputs to
/// config.out_dir. Window failures do not stop the run; they are listed in errors.csv
/// and make exit_code() nonzero.
RunSummary run_experiment(const ExperimentConfig& config, std::vector<TrialRecording> trials,
                          const RunOptions& options = {});
/// Loads the dataset named by the config first.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Files expected in a finished output directory for the given config.
std::vector<std::filesystem::path> expected_outputs(const ExperimentConfig& config);

}  // namespace handover::app
