#include "handover/fusion/fusion.hpp"

#include "handover/classifiers/lda.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"
#include "handover/evaluation/metrics.hpp"

#include <algorithm>
#include <memory>

namespace handover::fusion {

using evaluation::Split;
using features::FeatureSequence;

void FusionSpec::validate() const {
  if (modalities.size() < 2) throw SpecError("fusion needs at least two modalities");
  if (!(eeg_pca_target > 0.0 && eeg_pca_target <= 1.0)) throw SpecError("fusion EEG PCA target outside (0, 1]");
}

std::string FusionSpec::tag() const {
  std::string t = mode == FusionMode::Early ? "early:" : "late:";
  bool first = true;
  for (Modality m : kAllModalities) {
    if (!modalities.count(m)) continue;
    if (!first) t += "+";
    t += to_string(m);
    first = false;
  }
  return t;
}

Vector early_fuse(std::span<const Vector> parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector out(total);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.segment(off, p.size()) = p;
    off += p.size();
  }
  return out;
}

LateFusion late_fuse(std::span<const double> member_probs, std::span<const double> member_train_perf) {
  if (member_probs.size() != member_train_perf.size()) throw DimensionError("late fusion: probabilities and performances differ in count");
  if (member_probs.size() < 2) throw SpecError("late fusion needs at least two members");
  double total = 0.0;
  for (double perf : member_train_perf) {
    if (!(perf >= 0.0 && perf <= 1.0)) throw SpecError("late fusion performance outside [0, 1]");
    total += perf;
  }
  LateFusion out;
  const std::size_t n = member_probs.size();
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  if (total > 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.weights[i] = member_train_perf[i] / total;
  } else {
    out.equal_weight_fallback = true;
  }
  double p = 0.0;
  for (std::size_t i = 0; i < n; ++i) p += out.weights[i] * member_probs[i];
  // Keep the result inside the member envelope despite rounding.
  const auto [lo, hi] = std::minmax_element(member_probs.begin(), member_probs.end());
  out.probability = std::clamp(p, *lo, *hi);
  return out;
}

namespace {

std::vector<FeatureSequence> windowed_subset(const std::vector<FeatureSequence>& seqs, const std::vector<std::size_t>& idx,
                                             double end, const features::WindowGrid& grid) {
  std::vector<FeatureSequence> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(features::window_features(seqs[i], end, grid));
  return out;
}

std::vector<int> labels_at(const std::vector<FeatureSequence>& seqs, const std::vector<std::size_t>& idx) {
  std::vector<int> y;
  for (std::size_t i : idx) y.push_back(seqs[i].label);
  return y;
}

double auc_of(const Vector& p, const std::vector<int>& y) {
  return evaluation::auc_roc(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), y);
}

}  // namespace

double early_fusion_split(const std::vector<FusionMember>& members, double end_time_s, const Split& split,
                          const FusionSpec& spec, const features::WindowGrid& grid, Eigen::Index* dims_out) {
  if (members.empty()) throw SpecError("early fusion needs at least one member");
  std::vector<Matrix> train_parts, test_parts;
  for (const auto& m : members) {
    Matrix tr = features::flatten_rows(windowed_subset(m.seqs, split.train, end_time_s, grid));
    Matrix te = features::flatten_rows(windowed_subset(m.seqs, split.test, end_time_s, grid));
    if (m.modality == Modality::Eeg || spec.standardize_all) {
      const auto s = dsp::Standardizer::fit(tr);
      s.apply_in_place(tr);
      s.apply_in_place(te);
    }
    if (m.modality == Modality::Eeg) {
      const auto pca = features::pca_fit(tr, spec.eeg_pca_target);
      tr = features::pca_apply(pca, tr);
      te = features::pca_apply(pca, te);
    }
    train_parts.push_back(std::move(tr));
    test_parts.push_back(std::move(te));
  }
  auto concat = [](const std::vector<Matrix>& parts) {
    Eigen::Index cols = 0;
    for (const auto& p : parts) cols += p.cols();
    Matrix out(parts.front().rows(), cols);
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      out.middleCols(off, p.cols()) = p;
      off += p.cols();
    }
    return out;
  };
  const Matrix xtr = concat(train_parts);
  const Matrix xte = concat(test_parts);
  if (dims_out) *dims_out = xtr.cols();
  const auto model = classifiers::lda_fit(xtr, labels_at(members.front().seqs, split.train));
  return auc_of(classifiers::lda_predict_proba(model, xte), labels_at(members.front().seqs, split.test));
}

double late_fusion_split(const std::vector<FusionMember>& members, double end_time_s, const Split& split,
                         const FusionSpec& spec, const features::WindowGrid& grid) {
  const auto ytr = labels_at(members.front().seqs, split.train);
  const auto yte = labels_at(members.front().seqs, split.test);
  std::vector<Vector> test_probs;
  std::vector<double> perf;
  for (const auto& m : members) {
    const auto recipe = evaluation::Recipe::lda_for(m.modality, spec.standardize_all);
    const auto train = windowed_subset(m.seqs, split.train, end_time_s, grid);
    const auto clf = evaluation::fit_classifier(recipe, train, {}, 0);
    perf.push_back(auc_of(clf.predict(train), ytr));
    test_probs.push_back(clf.predict(windowed_subset(m.seqs, split.test, end_time_s, grid)));
  }
  Vector fused(static_cast<Eigen::Index>(yte.size()));
  std::vector<double> p(members.size());
  for (Eigen::Index i = 0; i < fused.size(); ++i) {
    for (std::size_t k = 0; k < members.size(); ++k) p[k] = test_probs[k](i);
    fused(i) = late_fuse(p, perf).probability;
  }
  return auc_of(fused, yte);
}

evaluation::SweepJob make_fusion_job(int participant_id, std::vector<FusionMember> members, const FusionSpec& spec,
                                     const evaluation::CvScheme& scheme, const features::WindowGrid& grid) {
  if (members.size() < 2) throw SpecError("fusion needs at least two members");
  for (auto& m : members) {
    std::stable_sort(m.seqs.begin(), m.seqs.end(),
                     [](const FeatureSequence& a, const FeatureSequence& b) { return a.trial_ref < b.trial_ref; });
  }
  std::stable_sort(members.begin(), members.end(),
                   [](const FusionMember& a, const FusionMember& b) { return a.modality < b.modality; });
  const auto& ref = members.front().seqs;
  for (const auto& m : members) {
    if (m.seqs.size() != ref.size()) throw DimensionError("fusion members cover different trial sets");
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (!(m.seqs[i].trial_ref == ref[i].trial_ref)) throw DimensionError("fusion members cover different trial sets");
  }
  evaluation::SweepJob job;
  job.participant_id = participant_id;
  job.tag = spec.tag();
  job.model = "lda";
  job.labels = evaluation::labels_of(ref);
  job.scheme = scheme;
  auto data = std::make_shared<const std::vector<FusionMember>>(std::move(members));
  job.evaluate = [data, spec, grid](double end, const Split& split, std::uint64_t) {
    return spec.mode == FusionMode::Early ? early_fusion_split(*data, end, split, spec, grid)
                                          : late_fusion_split(*data, end, split, spec, grid);
  };
  return job;
}

evaluation::AucTimeline run_fusion_sweep(std::vector<FusionMember> members, const FusionSpec& spec,
                                         const evaluation::CvScheme& scheme, const evaluation::SweepOptions& options) {
  const int participant = members.empty() || members.front().seqs.empty() ? 0 : members.front().seqs.front().trial_ref.participant_id;
  return evaluation::run_sweeps({make_fusion_job(participant, std::move(members), spec, scheme, options.grid)}, options).front();
}

}  // namespace handover::fusion
