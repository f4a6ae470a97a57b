#pragma once

#include "handover/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace handover::app {

/// Class signal of one modality: handover trials depart from the shared baseline
/// behaviour from `injection_s` on, by `effect`; `noise` is the sample noise scale.
struct ModalitySignal {
  double injection_s = 1.0;
  double effect = 0.0;
  double noise = 1.0;
};

/// Generator for desk-scale datasets. Units: gaze in pixels, EEG in microvolts,
/// motion in metres.
///   gaze   - each trial fixates a random point of the workspace; after the injection
///            time handover trials move that point towards the robot torso by the
///            fraction `effect` (0..1) over 0.2 s.
///   EEG    - AR(1) background plus 10 Hz and 20 Hz rhythms; handover trials lose the
///            fraction `effect` of rhythm amplitude over central channels (ERD).
///   motion - every trial reaches forward after onset; handover trials drift sideways
///            by `effect` metres after the injection time.
struct SynthProfile {
  int participants = 8;
  int trials_per_condition = 30;
  std::uint64_t seed = 1;
  std::set<Modality> modalities{Modality::Gaze};
  ModalitySignal eeg{1.0, 0.0, 5.0};
  ModalitySignal gaze{1.0, 0.0, 40.0};
  ModalitySignal motion{1.0, 0.0, 0.01};
  double eeg_rate_hz = 250.0;
  double gaze_rate_hz = 25.0;
  double motion_rate_hz = 5.0;
  std::vector<std::string> eeg_channels{"Cz", "C3", "C4", "FC1", "FC2", "FC5", "FC6", "CP1",
                                        "CP2", "F3", "F4", "Fz", "P3",  "P4",  "O1",  "O2"};
  double stream_start_s = -6.0;
  double stream_end_s = 7.0;
  double gaze_dropout = 0.01;  // share of gaze samples recorded as missing

  void validate() const;
};

/// Sections [synth], [eeg], [gaze], [motion] with key = value lines.
SynthProfile parse_synth_profile_text(const std::string& text, const std::string& origin = "<profile>");
SynthProfile parse_synth_profile(const std::filesystem::path& file);
std::string to_profile_text(const SynthProfile& profile);

/// All trials of the profile, in memory, participants 1..N and trial ids 1..3*trials_per_condition.
std::vector<TrialRecording> synthesize(const SynthProfile& profile);
TrialRecording synthesize_trial(const SynthProfile& profile, int participant, int trial, Condition condition);

/// Writes manifest.txt, per-trial CSVs under pXX/ and ground_truth.txt to `out_dir`.
void write_synthetic_dataset(const SynthProfile& profile, const std::filesystem::path& out_dir);

}  // namespace handover::app
