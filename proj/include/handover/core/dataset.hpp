#pragma once

#include "handover/core/types.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace handover {

/// Analysis epoch around movement onset; every window starts at the cue.
inline constexpr double kEpochStart = -5.0;
inline constexpr double kEpochEnd = 6.0;

/// Relative tolerance, in units of one sample step, used when snapping times to a grid.
inline constexpr double kGridTolerance = 1e-9;

/// Number of grid points of a grid starting exactly at `start` that fall in [start, end).
Eigen::Index grid_count(double start, double end, double step);

/// One per-trial row of the manifest. Paths are relative to the dataset root;
/// an empty path means the modality was not recorded.
struct ManifestEntry {
  int participant_id = 0;
  int trial_id = 0;
  Condition condition = Condition::Solo;
  double onset_s = 0.0;
  std::string eeg_path;
  std::string gaze_path;
  std::string motion_path;
  std::size_t line = 0;
};

struct DatasetManifest {
  int version = 1;
  std::optional<double> eeg_rate_hz;
  std::optional<double> gaze_rate_hz;
  std::optional<double> motion_rate_hz;
  std::vector<std::string> eeg_channels;  // empty: accept whatever the files carry
  std::vector<ManifestEntry> trials;
};

DatasetManifest parse_manifest(const std::filesystem::path& file);
void write_manifest(const std::filesystem::path& file, const DatasetManifest& manifest);

/// Loads every trial listed in the manifest. A listed file that does not exist
/// leaves that modality absent; malformed records and shape mismatches throw DataError.
std::vector<TrialRecording> load_dataset(const std::filesystem::path& root,
                                         const DatasetManifest& manifest);
std::vector<TrialRecording> load_dataset(const std::filesystem::path& root,
                                         const std::filesystem::path& manifest_file);

/// Samples whose onset-relative time lies in [window_start_s, window_end_s).
TimeSeries epoch(const TimeSeries& stream, double window_start_s, double window_end_s);

bool covers(const TimeSeries& stream, double start_s, double end_s);

/// Operational "uncorrupted" rule: present, covers the full epoch, and finite after
/// preprocessing (interior gaze gaps are repairable; an all-missing gaze column is not).
bool usable(const TrialRecording& trial, Modality modality);

/// Participants with at least `min_trials` trials in which every requested modality is usable.
std::set<int> gate_participants(const std::vector<LabeledTrial>& trials,
                                const std::set<Modality>& modalities, int min_trials);

/// Per-participant count of usable trials for one modality set.
std::vector<std::pair<int, int>> usable_trial_counts(const std::vector<LabeledTrial>& trials,
                                                     const std::set<Modality>& modalities);

// CSV stream writers used by the synthetic generator and the converter.
void write_eeg_csv(const std::filesystem::path& file, const RawEeg& eeg);
void write_gaze_csv(const std::filesystem::path& file, const RawGaze& gaze);
void write_motion_csv(const std::filesystem::path& file, const RawMotion& motion);

}  // namespace handover
