#include "handover/evaluation/sweep.hpp"

#include "handover/classifiers/lda.hpp"
#include "handover/core/error.hpp"
#include "handover/core/parallel.hpp"
#include "handover/core/rng.hpp"
#include "handover/core/text.hpp"
#include "handover/evaluation/metrics.hpp"

#include <algorithm>
#include <memory>
#include <unordered_map>

namespace handover::evaluation {

using features::FeatureSequence;

std::string to_string(ModelKind kind) { return kind == ModelKind::Lda ? "lda" : "lstm"; }

ModelKind parse_model_kind(const std::string& text) {
  const std::string t = text::lower(text::trim(text));
  if (t == "lda") return ModelKind::Lda;
  if (t == "lstm") return ModelKind::Lstm;
  throw SpecError("unknown model '" + text + "' (expected lda or lstm)");
}

Recipe Recipe::lda_for(Modality modality, bool standardize_all) {
  Recipe r;
  if (modality == Modality::Eeg) {
    r.standardize = true;
    r.pca_target = 0.99;
  } else {
    r.standardize = standardize_all;
  }
  return r;
}

Recipe Recipe::lstm_for(Modality modality) {
  Recipe r;
  r.model = ModelKind::Lstm;
  r.standardize = true;
  r.lstm = modality == Modality::Eeg ? classifiers::LstmSpec::eeg_recipe(1)
                                     : classifiers::LstmSpec::gaze_motion_recipe(1);
  return r;
}

std::vector<int> labels_of(const std::vector<FeatureSequence>& seqs) {
  std::vector<int> y;
  y.reserve(seqs.size());
  for (const auto& s : seqs) y.push_back(s.label);
  return y;
}

std::vector<InnerSplit> localize_inner(const Split& split) {
  std::unordered_map<std::size_t, std::size_t> pos;
  for (std::size_t p = 0; p < split.train.size(); ++p) pos[split.train[p]] = p;
  std::vector<InnerSplit> out;
  for (const auto& in : split.inner) {
    InnerSplit local;
    for (std::size_t i : in.train) local.train.push_back(pos.at(i));
    for (std::size_t i : in.validation) local.validation.push_back(pos.at(i));
    out.push_back(std::move(local));
  }
  return out;
}

namespace {

classifiers::TrainedClassifier fit_lda(const Recipe& recipe, const std::vector<FeatureSequence>& train) {
  classifiers::TrainedClassifier clf;
  Matrix x = features::flatten_rows(train);
  if (recipe.standardize) {
    clf.preprocessing.standardizer = dsp::Standardizer::fit(x);
    clf.preprocessing.standardizer->apply_in_place(x);
  }
  if (recipe.pca_target) {
    clf.preprocessing.pca = features::pca_fit(x, *recipe.pca_target);
    x = features::pca_apply(*clf.preprocessing.pca, x);
  }
  const auto y = labels_of(train);
  clf.model = classifiers::lda_fit(x, y, recipe.lda_shrinkage, recipe.lda_solver);
  return clf;
}

classifiers::TrainedClassifier fit_lstm(const Recipe& recipe, const std::vector<FeatureSequence>& train,
                                        const std::vector<InnerSplit>& inner, std::uint64_t seed) {
  if (inner.empty()) throw SpecError("the LSTM recipe needs nested cross-validation for its validation folds");
  if (recipe.pca_target) throw SpecError("PCA is not supported for LSTM inputs");
  classifiers::TrainedClassifier clf;
  if (recipe.standardize) {
    Eigen::Index rows = 0;
    for (const auto& s : train) rows += s.series.samples();
    Matrix stacked(rows, train.front().series.dims());
    Eigen::Index r = 0;
    for (const auto& s : train) {
      stacked.middleRows(r, s.series.samples()) = s.series.values;
      r += s.series.samples();
    }
    clf.preprocessing.standardizer = dsp::Standardizer::fit(stacked);
  }
  std::vector<Matrix> x;
  for (const auto& s : train) x.push_back(clf.preprocessing.apply_sequence(s.series.values));
  const auto y = labels_of(train);

  classifiers::LstmSpec spec = recipe.lstm;
  spec.input_dim = static_cast<int>(train.front().series.dims());
  std::vector<classifiers::LstmMember> members;
  std::vector<double> scores;
  for (std::size_t m = 0; m < inner.size(); ++m) {
    std::vector<Matrix> tx, vx;
    std::vector<int> ty, vy;
    for (std::size_t i : inner[m].train) {
      tx.push_back(x[i]);
      ty.push_back(y[i]);
    }
    for (std::size_t i : inner[m].validation) {
      vx.push_back(x[i]);
      vy.push_back(y[i]);
    }
    spec.seed = derive_seed(seed, {0x157, m});
    classifiers::LstmMember member;
    member.model = classifiers::lstm_train(spec, tx, ty, vx, vy);
    std::vector<double> p;
    for (const auto& v : vx) p.push_back(classifiers::lstm_forward(member.model, v));
    scores.push_back(auc_roc(p, vy));
    members.push_back(std::move(member));
  }
  const auto w = classifiers::normalize_weights(scores);
  for (std::size_t m = 0; m < members.size(); ++m) members[m].weight = w[m];
  clf.model = std::move(members);
  return clf;
}

std::vector<FeatureSequence> subset(const std::vector<FeatureSequence>& seqs, const std::vector<std::size_t>& idx) {
  std::vector<FeatureSequence> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(seqs[i]);
  return out;
}

std::vector<FeatureSequence> window_all(const std::vector<FeatureSequence>& seqs, double end,
                                        const features::WindowGrid& grid) {
  std::vector<FeatureSequence> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(features::window_features(s, end, grid));
  return out;
}

double score_split(const std::vector<FeatureSequence>& windowed, const Recipe& recipe, const Split& split,
                   std::uint64_t seed) {
  const auto train = subset(windowed, split.train);
  const auto test = subset(windowed, split.test);
  const auto clf = fit_classifier(recipe, train, localize_inner(split), seed);
  const Vector p = clf.predict(test);
  return auc_roc(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), labels_of(test));
}

}  // namespace

classifiers::TrainedClassifier fit_classifier(const Recipe& recipe, const std::vector<FeatureSequence>& train,
                                              const std::vector<InnerSplit>& inner, std::uint64_t seed) {
  if (train.empty()) throw NumericError("empty training set");
  return recipe.model == ModelKind::Lda ? fit_lda(recipe, train) : fit_lstm(recipe, train, inner, seed);
}

std::vector<double> evaluate_window_splits(const std::vector<FeatureSequence>& seqs, double end_time_s,
                                           const Recipe& recipe, const std::vector<Split>& splits,
                                           std::uint64_t seed, const features::WindowGrid& grid) {
  const auto windowed = window_all(seqs, end_time_s, grid);
  const auto w = static_cast<std::uint64_t>(grid.index_of(end_time_s));
  std::vector<double> aucs;
  for (const auto& s : splits) {
    aucs.push_back(score_split(windowed, recipe, s,
                               derive_seed(seed, {w, static_cast<std::uint64_t>(s.repeat), static_cast<std::uint64_t>(s.fold)})));
  }
  return aucs;
}

WindowStats evaluate_window(const std::vector<FeatureSequence>& seqs, double end_time_s, const Recipe& recipe,
                            const CvScheme& scheme, std::uint64_t seed, const features::WindowGrid& grid) {
  const auto splits = make_splits(labels_of(seqs), scheme);
  const auto aucs = evaluate_window_splits(seqs, end_time_s, recipe, splits, seed, grid);
  return WindowStats::from_aucs(aucs);
}

std::vector<AucTimeline> run_sweeps(const std::vector<SweepJob>& jobs, const SweepOptions& options) {
  const auto ends = options.grid.ends();
  const std::size_t n_windows = ends.size();

  struct Task {
    std::size_t job, window, split;
  };
  std::vector<std::vector<Split>> splits(jobs.size());
  std::vector<std::string> job_error(jobs.size());
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    try {
      splits[j] = make_splits(jobs[j].labels, jobs[j].scheme);
    } catch (const Error& e) {
      job_error[j] = std::string("participant ") + std::to_string(jobs[j].participant_id) + ": " + e.what();
      continue;
    }
    for (std::size_t w = 0; w < n_windows; ++w)
      for (std::size_t s = 0; s < splits[j].size(); ++s) tasks.push_back({j, w, s});
  }

  std::vector<double> auc(tasks.size(), 0.0);
  std::vector<std::string> error(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const SweepJob& job = jobs[task.job];
    const Split& split = splits[task.job][task.split];
    const std::uint64_t seed =
        derive_seed(job.scheme.seed, {task.window, static_cast<std::uint64_t>(split.repeat), static_cast<std::uint64_t>(split.fold)});
    try {
      auc[t] = job.evaluate(ends[task.window], split, seed);
    } catch (const std::exception& e) {
      error[t] = "participant " + std::to_string(job.participant_id) + ", window " + text::format_double(ends[task.window]) +
                 ", split " + std::to_string(split.repeat) + "/" + std::to_string(split.fold) + ": " + e.what();
    }
  });

  std::vector<AucTimeline> out;
  std::size_t t = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    AucTimeline tl;
    tl.participant_id = jobs[j].participant_id;
    tl.tag = jobs[j].tag;
    tl.model = jobs[j].model;
    tl.window_end_times_s = ends;
    for (std::size_t w = 0; w < n_windows; ++w) {
      if (!job_error[j].empty()) {
        tl.windows.push_back(WindowStats::failed(job_error[j]));
        continue;
      }
      std::vector<double> values;
      std::string first_error;
      for (std::size_t s = 0; s < splits[j].size(); ++s, ++t) {
        if (!error[t].empty() && first_error.empty()) first_error = error[t];
        values.push_back(auc[t]);
      }
      tl.windows.push_back(first_error.empty() ? WindowStats::from_aucs(values) : WindowStats::failed(first_error));
    }
    out.push_back(std::move(tl));
  }
  return out;
}

SweepJob make_modality_job(int participant_id, std::vector<FeatureSequence> seqs, const Recipe& recipe,
                           const CvScheme& scheme, const features::WindowGrid& grid) {
  std::stable_sort(seqs.begin(), seqs.end(),
                   [](const FeatureSequence& a, const FeatureSequence& b) { return a.trial_ref < b.trial_ref; });
  SweepJob job;
  job.participant_id = participant_id;
  job.tag = seqs.empty() ? "" : handover::to_string(seqs.front().modality);
  job.model = to_string(recipe.model);
  job.labels = labels_of(seqs);
  job.scheme = scheme;
  auto data = std::make_shared<const std::vector<FeatureSequence>>(std::move(seqs));
  job.evaluate = [data, recipe, grid](double end, const Split& split, std::uint64_t seed) {
    return score_split(window_all(*data, end, grid), recipe, split, seed);
  };
  return job;
}

AucTimeline sweep(const std::vector<FeatureSequence>& seqs, const Recipe& recipe, const CvScheme& scheme,
                  const SweepOptions& options) {
  const int participant = seqs.empty() ? 0 : seqs.front().trial_ref.participant_id;
  return run_sweeps({make_modality_job(participant, seqs, recipe, scheme, options.grid)}, options).front();
}

}  // namespace handover::evaluation
