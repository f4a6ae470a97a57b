#pragma once

#include "handover/core/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace handover::classifiers {

struct LstmSpec {
  int layers = 2;
  int hidden = 10;
  int input_dim = 2;
  int batch_size = 5;
  int max_epochs = 200;
  /// Early stopping is only considered once this many epochs have run; nullopt disables it.
  std::optional<int> early_stop_after = 100;
  int patience = 20;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;

  /// 1 layer, 128 units, batch 16, a fixed 100 epochs.
  static LstmSpec eeg_recipe(int input_dim);
  /// 2 layers, 10 units, batch 5, 200 epochs, patience after epoch 100.
  static LstmSpec gaze_motion_recipe(int input_dim);

  void validate() const;
  /// Total length of the flat parameter vector.
  std::size_t parameter_count() const;
};

/// Parameters are stored flat, layer by layer: W_ih [4H x I] row-major, W_hh [4H x H]
/// row-major, bias [4H], with gate blocks in the order input, forget, candidate, output;
/// then the head weights [H] and head bias.
struct LstmModel {
  LstmSpec spec;
  std::vector<double> parameters;

  /// Uniform in +-1/sqrt(H), forget-gate biases +1.
  static LstmModel initialize(const LstmSpec& spec);
  static LstmModel zeros(const LstmSpec& spec);
};

/// Offsets into the flat parameter vector.
struct LstmLayout {
  struct Layer {
    std::size_t w_ih, w_hh, bias, input_dim;
  };
  std::vector<Layer> layers;
  std::size_t head_w = 0;
  std::size_t head_b = 0;
  std::size_t total = 0;

  explicit LstmLayout(const LstmSpec& spec);
};

/// Class-1 probability for one sequence [T x input_dim].
double lstm_forward(const LstmModel& model, const Matrix& seq);
/// Head pre-activation (logit).
double lstm_logit(const LstmModel& model, const Matrix& seq);

struct SequenceBatch {
  std::vector<const Matrix*> sequences;
  std::vector<int> labels;
};

/// loss_scale * mean binary cross-entropy over the batch.
double lstm_loss(const LstmModel& model, const SequenceBatch& batch, double loss_scale = 1.0);
/// Loss and its gradient by backpropagation through time.
double lstm_loss_gradient(const LstmModel& model, const SequenceBatch& batch,
                          std::vector<double>& gradient, double loss_scale = 1.0);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
};

/// Analytic gradient against central differences with step 1e-5;
/// relative error |a - n| / max(|a|, |n|, 1e-6). Intended for small models.
GradientCheckResult gradient_check(const LstmModel& model, const SequenceBatch& batch,
                                   double loss_scale = 1.0, double step = 1e-5);

struct LstmTrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
};

/// Mini-batch Adam on mean binary cross-entropy with gradient-norm clipping. Returns
/// the parameter snapshot with the lowest validation loss.
/// Throws NumericError on single-class training data or a non-finite loss.
LstmModel lstm_train(const LstmSpec& spec, const std::vector<Matrix>& train_x, std::span<const int> train_y,
                     const std::vector<Matrix>& val_x, std::span<const int> val_y,
                     LstmTrainReport* report = nullptr);

}  // namespace handover::classifiers
