#include "handover/core/types.hpp"

#include "handover/core/error.hpp"
#include "handover/core/text.hpp"

namespace handover {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Solo: return "Solo";
    case Condition::Handover: return "Handover";
    case Condition::Joint: return "Joint";
  }
  return "?";
}

Condition parse_condition(std::string_view text) {
  const std::string l = text::lower(text::trim(text));
  if (l == "solo") return Condition::Solo;
  if (l == "handover") return Condition::Handover;
  if (l == "joint") return Condition::Joint;
  throw SpecError("unknown condition '" + std::string(text) + "' (expected Solo, Handover or Joint)");
}

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Eeg: return "eeg";
    case Modality::Gaze: return "gaze";
    case Modality::Motion: return "motion";
  }
  return "?";
}

Modality parse_modality(std::string_view text) {
  const std::string l = text::lower(text::trim(text));
  if (l == "eeg") return Modality::Eeg;
  if (l == "gaze") return Modality::Gaze;
  if (l == "motion" || l == "hand" || l == "hand-motion") return Modality::Motion;
  throw SpecError("unknown modality '" + std::string(text) + "' (expected eeg, gaze or motion)");
}

TimeSeries::TimeSeries(double start, double step, Matrix v)
    : start_time_s(start), step_s(step), values(std::move(v)) {
  if (!(step_s > 0.0)) throw SpecError("time series step must be positive");
}

bool TrialRecording::has(Modality m) const {
  switch (m) {
    case Modality::Eeg: return eeg.has_value();
    case Modality::Gaze: return gaze.has_value();
    case Modality::Motion: return motion.has_value();
  }
  return false;
}

std::vector<LabeledTrial> label_trials(std::vector<TrialRecording> trials) {
  std::vector<LabeledTrial> out;
  out.reserve(trials.size());
  for (auto& t : trials) out.emplace_back(std::move(t));
  return out;
}

}  // namespace handover
