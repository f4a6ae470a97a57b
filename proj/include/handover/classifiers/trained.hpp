#pragma once

#include "handover/classifiers/lda.hpp"
#include "handover/classifiers/lstm.hpp"
#include "handover/dsp/standardize.hpp"
#include "handover/features/features.hpp"
#include "handover/features/pca.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace handover::classifiers {

struct LstmMember {
  LstmModel model;
  double weight = 0.0;
};

/// Weighted mean of member probabilities. Weights must be nonnegative and sum to 1.
double ensemble_predict(std::span<const LstmMember> members, const Matrix& seq);

/// Normalizes scores (e.g. validation AUCs) into ensemble weights; equal weights when
/// every score is zero. Negative or non-finite scores are rejected.
std::vector<double> normalize_weights(std::span<const double> scores);

/// Statistics fitted on the training split and replayed on test data. For LDA the
/// standardizer covers the flattened columns; for the LSTM it covers the D per-step
/// features and is applied to every time step.
struct Preprocessing {
  std::optional<dsp::Standardizer> standardizer;
  std::optional<features::PcaModel> pca;
  bool fitted_on_training_only = true;

  Matrix apply_flat(const Matrix& rows) const;
  Matrix apply_sequence(const Matrix& seq) const;
};

struct TrainedClassifier {
  std::variant<LdaModel, LstmModel, std::vector<LstmMember>> model;
  Preprocessing preprocessing;

  bool is_lda() const { return std::holds_alternative<LdaModel>(model); }
  /// Class-1 probabilities. LDA sees each sequence flattened time-major.
  Vector predict(const std::vector<features::FeatureSequence>& seqs) const;
  Vector predict_flat(const Matrix& rows) const;
  Vector predict_sequences(const std::vector<Matrix>& seqs) const;
};

/// Versioned binary model format ("HOMD"), bit-exact on round trip.
void save_model(std::ostream& out, const TrainedClassifier& model);
TrainedClassifier load_model(std::istream& in);
void save_model(const std::filesystem::path& file, const TrainedClassifier& model);
TrainedClassifier load_model(const std::filesystem::path& file);

}  // namespace handover::classifiers
