#pragma once

#include "handover/evaluation/sweep.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace handover::fusion {

enum class FusionMode { Early, Late };

struct FusionSpec {
  FusionMode mode = FusionMode::Late;
  std::set<Modality> modalities;
  double eeg_pca_target = 0.99;
  /// Standardize gaze and motion parts too (EEG is always standardized).
  bool standardize_all = false;

  void validate() const;
  /// "early:eeg+gaze", "late:gaze+motion", ... in the fixed EEG, Gaze, Motion order.
  std::string tag() const;
};

/// Concatenation in the order given (callers pass EEG-PCA, Gaze, Motion).
Vector early_fuse(std::span<const Vector> parts);

struct LateFusion {
  double probability = 0.0;
  std::vector<double> weights;
  bool equal_weight_fallback = false;
};

/// sum_i w_i p_i with w_i = perf_i / sum_j perf_j; equal weights when all
/// performances are zero. Throws SpecError for fewer than two members or
/// performances outside [0, 1].
LateFusion late_fuse(std::span<const double> member_probs, std::span<const double> member_train_perf);

/// One input stream of a fusion: sequences of one modality (or a copy of one) for the
/// participant's trials, aligned by position with every other member.
struct FusionMember {
  Modality modality = Modality::Gaze;
  std::vector<features::FeatureSequence> seqs;
};

/// Early fusion of one split: EEG parts standardized and PCA-reduced on the training
/// fold, all parts flattened and concatenated, one LDA fitted. Returns the test AUC.
/// `dims_out` receives the fused dimension.
double early_fusion_split(const std::vector<FusionMember>& members, double end_time_s,
                          const evaluation::Split& split, const FusionSpec& spec,
                          const features::WindowGrid& grid = {}, Eigen::Index* dims_out = nullptr);

/// Late fusion of one split: an LDA per member, weighted by its training-fold AUC.
double late_fusion_split(const std::vector<FusionMember>& members, double end_time_s,
                         const evaluation::Split& split, const FusionSpec& spec,
                         const features::WindowGrid& grid = {});

/// Sweep job for a fusion. Members are re-sorted by trial and must list the same trials.
evaluation::SweepJob make_fusion_job(int participant_id, std::vector<FusionMember> members, const FusionSpec& spec,
                                     const evaluation::CvScheme& scheme, const features::WindowGrid& grid = {});

evaluation::AucTimeline run_fusion_sweep(std::vector<FusionMember> members, const FusionSpec& spec,
                                         const evaluation::CvScheme& scheme,
                                         const evaluation::SweepOptions& options = {});

}  // namespace handover::fusion
