#pragma once

#include "handover/classifiers/trained.hpp"
#include "handover/evaluation/cv.hpp"
#include "handover/evaluation/timeline.hpp"
#include "handover/features/features.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace handover::evaluation {

enum class ModelKind { Lda, Lstm };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// How one window's classifier is trained: preprocessing fitted on the training split
/// and the model family.
struct Recipe {
  ModelKind model = ModelKind::Lda;
  bool standardize = false;
  std::optional<double> pca_target;
  double lda_shrinkage = 1e-4;
  classifiers::LdaSolver lda_solver = classifiers::LdaSolver::Auto;
  /// input_dim is taken from the data.
  classifiers::LstmSpec lstm;

  /// EEG: standardize then PCA to 99% variance. Gaze and motion: raw flattened
  /// features unless `standardize_all`.
  static Recipe lda_for(Modality modality, bool standardize_all = false);
  /// Reference recipes; inputs are standardized per feature.
  static Recipe lstm_for(Modality modality);
};

/// Fits preprocessing and model on training data only. `inner` partitions the
/// training positions for LSTM ensembles (one member per inner split, weighted by
/// validation AUC); LDA ignores it.
classifiers::TrainedClassifier fit_classifier(const Recipe& recipe, const std::vector<features::FeatureSequence>& train,
                                              const std::vector<InnerSplit>& inner, std::uint64_t seed);

/// Splits with inner indices translated to positions inside `split.train`.
std::vector<InnerSplit> localize_inner(const Split& split);

std::vector<int> labels_of(const std::vector<features::FeatureSequence>& seqs);

/// Test-fold AUC of every split for one window end; sequences must all cover the window.
std::vector<double> evaluate_window_splits(const std::vector<features::FeatureSequence>& seqs, double end_time_s,
                                           const Recipe& recipe, const std::vector<Split>& splits,
                                           std::uint64_t seed, const features::WindowGrid& grid = {});
WindowStats evaluate_window(const std::vector<features::FeatureSequence>& seqs, double end_time_s,
                            const Recipe& recipe, const CvScheme& scheme, std::uint64_t seed,
                            const features::WindowGrid& grid = {});

/// Test-fold AUC of one split at one window end.
using SplitEvaluator = std::function<double(double window_end_s, const Split& split, std::uint64_t seed)>;

/// One timeline to compute: labels define the CV splits, the evaluator scores a split.
struct SweepJob {
  int participant_id = 0;
  std::string tag;
  std::string model;
  std::vector<int> labels;
  CvScheme scheme;
  SplitEvaluator evaluate;
};

struct SweepOptions {
  features::WindowGrid grid;
  int jobs = 1;
};

/// Evaluates every (job, window, split) task on the worker pool and reduces in a fixed
/// order, so output is independent of `jobs`. A failing split marks its window missing
/// with the error text; a job whose splits cannot be built has every window missing.
/// Split seeds derive from (scheme.seed, window index, repeat, fold).
std::vector<AucTimeline> run_sweeps(const std::vector<SweepJob>& jobs, const SweepOptions& options);

/// Single-modality job. Sequences are sorted by trial so results do not depend on input order.
SweepJob make_modality_job(int participant_id, std::vector<features::FeatureSequence> seqs, const Recipe& recipe,
                           const CvScheme& scheme, const features::WindowGrid& grid = {});

AucTimeline sweep(const std::vector<features::FeatureSequence>& seqs, const Recipe& recipe, const CvScheme& scheme,
                  const SweepOptions& options = {});

}  // namespace handover::evaluation
