#pragma once

#include <filesystem>

namespace handover::app {

/// Maps the published archive layout onto a manifest dataset.
///
///   <archive>/sub-XX/events.csv            trial,condition,onset_s
///   <archive>/sub-XX/trial-YYY_eeg.csv     time,<channel>...
///   <archive>/sub-XX/trial-YYY_gaze.csv    time,x,y,refx,refy
///   <archive>/sub-XX/trial-YYY_motion.csv  time,x,y,z
///
/// Stream files are copied to <out>/pXX/tYYY_<modality>.csv, sampling rates and the EEG
/// montage are taken from the first file of each modality, and the result is loaded
/// once to validate it. Returns the number of trials written.
int convert_dataset(const std::filesystem::path& archive, const std::filesystem::path& out_dir);

}  // namespace handover::app
