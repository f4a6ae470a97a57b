#include "handover/evaluation/cv.hpp"

#include "handover/core/error.hpp"
#include "handover/core/rng.hpp"

#include <algorithm>
#include <string>

namespace handover::evaluation {

namespace {

// Fold index per position of `idx` (positions into idx, not data indices).
std::vector<int> deal_folds(std::span<const std::size_t> idx, std::span<const int> labels, int k,
                            bool require_both, std::uint64_t seed, const char* what) {
  if (k < 2) throw SpecError(std::string(what) + " k must be at least 2, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > idx.size()) {
    throw SpecError(std::string(what) + " k = " + std::to_string(k) + " exceeds the " + std::to_string(idx.size()) +
                    " available samples");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t p = 0; p < idx.size(); ++p) {
    const int y = labels[idx[p]];
    if (y != 0 && y != 1) throw SpecError("labels must be 0 or 1");
    by_class[y].push_back(p);
  }
  if (require_both) {
    const std::size_t smallest = std::min(by_class[0].size(), by_class[1].size());
    if (smallest < static_cast<std::size_t>(k)) {
      throw SpecError(std::string(what) + " class too small for k = " + std::to_string(k) + ": the smaller class has " +
                      std::to_string(smallest) + " samples; use k <= " + std::to_string(std::max<std::size_t>(smallest, 2)));
    }
  }
  Rng rng(seed);
  std::vector<int> fold(idx.size(), 0);
  std::size_t dealt = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t p : members) fold[p] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
  }
  return fold;
}

}  // namespace

CvScheme CvScheme::repeated(int k, int repeats, std::uint64_t seed) {
  CvScheme s;
  s.k = k;
  s.repeats = repeats;
  s.seed = seed;
  return s;
}

CvScheme CvScheme::nested(int k, int repeats, int inner_k, std::uint64_t seed) {
  CvScheme s = repeated(k, repeats, seed);
  s.kind = Kind::NestedStratified;
  s.inner_k = inner_k;
  return s;
}

std::vector<Split> make_splits(std::span<const int> labels, const CvScheme& scheme) {
  if (scheme.repeats < 1) throw SpecError("CV repeats must be at least 1");
  std::vector<std::size_t> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::vector<Split> splits;
  for (int r = 0; r < scheme.repeats; ++r) {
    const auto fold = deal_folds(all, labels, scheme.k, scheme.require_both_classes_per_fold,
                                 derive_seed(scheme.seed, {0xcf, static_cast<std::uint64_t>(r)}), "outer CV:");
    for (int f = 0; f < scheme.k; ++f) {
      Split s;
      s.repeat = r;
      s.fold = f;
      for (std::size_t i = 0; i < all.size(); ++i) (fold[i] == f ? s.test : s.train).push_back(i);
      if (scheme.kind == CvScheme::Kind::NestedStratified) {
        const auto inner_fold = deal_folds(
            s.train, labels, scheme.inner_k, scheme.require_both_classes_per_fold,
            derive_seed(scheme.seed, {0xcf, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f)}), "inner CV:");
        for (int g = 0; g < scheme.inner_k; ++g) {
          InnerSplit in;
          for (std::size_t p = 0; p < s.train.size(); ++p) (inner_fold[p] == g ? in.validation : in.train).push_back(s.train[p]);
          s.inner.push_back(std::move(in));
        }
      }
      splits.push_back(std::move(s));
    }
  }
  return splits;
}

}  // namespace handover::evaluation
