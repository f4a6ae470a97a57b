#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace handover::evaluation {

struct CvScheme {
  enum class Kind { RepeatedStratifiedKFold, NestedStratified };
  Kind kind = Kind::RepeatedStratifiedKFold;
  int k = 10;
  int repeats = 3;
  int inner_k = 10;  // nested mode only
  std::uint64_t seed = 0;
  /// Demand at least k members of each class, so every test fold sees both classes.
  bool require_both_classes_per_fold = true;

  static CvScheme repeated(int k, int repeats, std::uint64_t seed);
  static CvScheme nested(int k, int repeats, int inner_k, std::uint64_t seed);
};

struct InnerSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

struct Split {
  int repeat = 0;
  int fold = 0;
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
  std::vector<InnerSplit> inner;   // nested mode: partition of `train`
};

/// Stratified k-fold assignment of `labels` (0/1) repeated `repeats` times.
/// Within each repeat the members of each class are shuffled and dealt to folds in
/// turn, the dealing continuing from one class to the next, so each fold gets
/// floor or ceil of n_class / k members of every class. Inner folds in nested mode
/// are dealt the same way from the outer training indices only.
/// Throws SpecError when k < 2, k > n, or (by default) a class has fewer than k members.
std::vector<Split> make_splits(std::span<const int> labels, const CvScheme& scheme);

}  // namespace handover::evaluation
