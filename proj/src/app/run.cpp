#include "handover/app/run.hpp"

#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/parallel.hpp"
#include "handover/core/text.hpp"
#include "handover/features/cache.hpp"
#include "handover/neuro/neuro.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

namespace handover::app {

namespace fs = std::filesystem;
using evaluation::AucTimeline;
using features::FeatureSequence;

namespace {

std::string fmt(double v) { return text::format_double(v); }

std::string file_safe(std::string s) {
  std::replace(s.begin(), s.end(), ':', '-');
  return s;
}

std::string participant_dir(int pid) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%02d", pid);
  return buf;
}

class CsvFile {
public:
  CsvFile(const fs::path& path, std::vector<fs::path>& written) : out_(path) {
    if (!out_) throw DataError("cannot write " + path.string());
    written.push_back(path);
  }
  template <typename... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }
  std::ofstream out_;
};

void log(const RunOptions& o, const std::string& msg) {
  if (o.log) *o.log << msg << '\n' << std::flush;
}

// Features of every (trial, modality) pair that is usable. A trial whose stream turns
// out to be unusable while building is dropped for that modality; configuration
// problems (SpecError) abort the run.
std::vector<std::map<Modality, FeatureSequence>> build_all_features(const ExperimentConfig& cfg,
                                                                    const std::vector<TrialRecording>& trials,
                                                                    const std::set<Modality>& needed,
                                                                    const RunOptions& options) {
  struct Task {
    std::size_t trial;
    Modality modality;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < trials.size(); ++i)
    for (Modality m : needed)
      if (usable(trials[i], m)) tasks.push_back({i, m});

  std::optional<features::FeatureCache> cache;
  if (cfg.cache_dir) cache.emplace(*cfg.cache_dir, text::fnv1a(fs::absolute(cfg.root).lexically_normal().string()));

  std::vector<std::optional<FeatureSequence>> built(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
    const auto& [i, m] = tasks[t];
    try {
      built[t] = cache ? cache->get_or_build(trials[i], m, cfg.eeg) : features::build_features(trials[i], m, cfg.eeg);
    } catch (const CoverageError&) {
    } catch (const ModalityAbsentError&) {
    } catch (const NumericError&) {
    }
  });
  std::vector<std::map<Modality, FeatureSequence>> out(trials.size());
  for (std::size_t t = 0; t < tasks.size(); ++t)
    if (built[t]) out[tasks[t].trial].emplace(tasks[t].modality, std::move(*built[t]));
  return out;
}

GateRecord gate(int pid, const std::string& tag, const std::vector<int>& labels, int min_trials,
                const ExperimentConfig& cfg) {
  GateRecord g;
  g.participant_id = pid;
  g.tag = tag;
  g.usable_trials = static_cast<int>(labels.size());
  g.handover = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  g.non_handover = g.usable_trials - g.handover;
  const int need_class = cfg.require_both_classes_per_fold ? cfg.cv_k : 1;
  if (g.usable_trials < min_trials) {
    g.reason = "fewer than " + std::to_string(min_trials) + " usable trials";
  } else if (g.usable_trials < cfg.cv_k) {
    g.reason = "fewer usable trials than CV folds (" + std::to_string(cfg.cv_k) + ")";
  } else if (std::min(g.handover, g.non_handover) < need_class) {
    g.reason = "smallest class has " + std::to_string(std::min(g.handover, g.non_handover)) + " trials, " +
               std::to_string(cfg.cv_k) + "-fold CV needs " + std::to_string(need_class);
  } else {
    g.included = true;
    g.reason = "ok";
  }
  return g;
}

void write_timeline_rows(CsvFile& csv, const AucTimeline& tl) {
  for (std::size_t w = 0; w < tl.windows.size(); ++w) {
    const auto& s = tl.windows[w];
    csv.row(tl.participant_id, tl.tag, tl.model, tl.window_end_times_s[w], s.mean, s.std, s.sem, s.median, s.q25,
            s.q75, s.n_splits, std::string(s.missing() ? "missing" : "ok"));
  }
}

constexpr const char* kTimelineHeader[] = {"participant", "tag",     "model",    "window_end", "auc_mean", "auc_dispersion",
                                           "auc_sem",     "auc_median", "auc_q25", "auc_q75",   "n_splits", "status"};

void timeline_header(CsvFile& csv) {
  csv.row(std::string(kTimelineHeader[0]), std::string(kTimelineHeader[1]), std::string(kTimelineHeader[2]),
          std::string(kTimelineHeader[3]), std::string(kTimelineHeader[4]), std::string(kTimelineHeader[5]),
          std::string(kTimelineHeader[6]), std::string(kTimelineHeader[7]), std::string(kTimelineHeader[8]),
          std::string(kTimelineHeader[9]), std::string(kTimelineHeader[10]), std::string(kTimelineHeader[11]));
}

// Timelines of one output group, bucketed by tag in first-appearance order.
std::vector<std::vector<AucTimeline>> by_tag(const std::vector<AucTimeline>& tls) {
  std::vector<std::vector<AucTimeline>> out;
  std::map<std::string, std::size_t> index;
  for (const auto& tl : tls) {
    auto [it, fresh] = index.emplace(tl.tag, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(tl);
  }
  return out;
}

void write_median(const fs::path& path, const std::vector<std::vector<AucTimeline>>& groups,
                  std::vector<fs::path>& written) {
  CsvFile csv(path, written);
  csv.row("tag", "model", "window_end", "median", "q25", "q75", "n_participants");
  for (const auto& g : groups) {
    const auto agg = evaluation::aggregate_participants(g);
    for (std::size_t w = 0; w < agg.window_end_times_s.size(); ++w) {
      csv.row(agg.tag, agg.model, agg.window_end_times_s[w], agg.median[w], agg.q25[w], agg.q75[w],
              agg.n_participants[w]);
    }
  }
}

void write_latency(const fs::path& path, const std::vector<std::vector<AucTimeline>>& groups,
                   const ExperimentConfig& cfg, std::vector<fs::path>& written) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  written.push_back(path);
  if (groups.empty()) {
    out << "level,anova_F,anova_p\n";
    return;
  }
  const auto table = evaluation::latency_table(groups, cfg.levels, cfg.run_length);
  out << "level";
  for (const auto& t : table.tags) out << ',' << t;
  out << ",anova_F,anova_p\n";
  for (std::size_t l = 0; l < table.levels.size(); ++l) {
    out << fmt(table.levels[l]);
    for (const auto& t : table.times[l]) out << ',' << (t ? fmt(*t) : std::string("X"));
    const auto& a = table.anova[l];
    out << ',' << (a ? fmt(a->statistic) : std::string("NA")) << ',' << (a ? fmt(a->p_value) : std::string("NA"))
        << '\n';
  }
}

void run_neuro(const ExperimentConfig& cfg, const std::vector<TrialRecording>& trials,
               const std::vector<std::map<Modality, FeatureSequence>>& feats, RunSummary& summary) {
  const fs::path dir = cfg.out_dir / "neuro";
  fs::create_directories(dir);
  auto record = [&](const std::string& what, const std::exception& e) {
    summary.errors.push_back({0, "neuro:" + what, "", std::nan(""), e.what()});
  };

  try {
    const neuro::ZoneMap zones = cfg.neuro.zones_file ? neuro::parse_zone_map(*cfg.neuro.zones_file)
                                                      : neuro::ZoneMap::defaults();
    std::vector<FeatureSequence> seqs;
    std::vector<Condition> conds;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto it = feats[i].find(Modality::Gaze);
      if (it == feats[i].end()) continue;
      seqs.push_back(it->second);
      conds.push_back(trials[i].condition);
    }
    CsvFile csv(dir / "gaze_zones.csv", summary.written);
    csv.row("interval_start", "interval_end", "condition", "zone", "percent", "samples");
    for (const auto& [a, b] : cfg.neuro.zone_intervals) {
      const auto table = neuro::gaze_zone_frequencies(seqs, conds, zones, a, b);
      for (const auto& [cond, pct] : table.percent)
        for (std::size_t z = 0; z < table.zones.size(); ++z)
          csv.row(a, b, std::string(to_string(cond)), table.zones[z], pct[z], table.samples.at(cond));
    }
  } catch (const Error& e) {
    record("gaze_zones", e);
  }

  std::vector<TrialRecording> eeg_trials[2];
  for (const auto& t : trials)
    if (usable(t, Modality::Eeg)) eeg_trials[label_of(t.condition)].push_back(t);
  const char* group_name[2] = {"non_handover", "handover"};

  try {
    CsvFile csv(dir / "erp.csv", summary.written);
    csv.row("group", "time", "mean", "variance", "participants", "trials");
    const auto& channels = cfg.neuro.erp_channels.empty() ? neuro::default_erp_channels() : cfg.neuro.erp_channels;
    for (int g : {1, 0}) {
      const auto erp = neuro::erp_grand_average(eeg_trials[g], channels, cfg.neuro.erp_baseline_start,
                                                cfg.neuro.erp_baseline_end);
      for (Eigen::Index i = 0; i < erp.mean.samples(); ++i)
        csv.row(std::string(group_name[g]), erp.mean.time_at(i), erp.mean.values(i, 0), erp.variance(i),
                erp.participants, erp.trials);
    }
  } catch (const Error& e) {
    record("erp", e);
  }

  neuro::ErdsOptions eo;
  eo.baseline_start = cfg.neuro.erds_baseline_start;
  eo.baseline_end = cfg.neuro.erds_baseline_end;
  eo.preprocess = cfg.eeg.preprocess;
  const neuro::BandSpec bands[] = {neuro::BandSpec::mu(), neuro::BandSpec::beta(), neuro::BandSpec::gamma()};
  try {
    CsvFile csv(dir / "erds.csv", summary.written);
    csv.row("band", "group", "time", "relative_change");
    for (const auto& band : bands)
      for (int g : {1, 0}) {
        const auto curve = neuro::erds(eeg_trials[g], band, cfg.neuro.erds_channel, eo);
        for (Eigen::Index i = 0; i < curve.samples(); ++i)
          csv.row(band.name, std::string(group_name[g]), curve.time_at(i), curve.values(i, 0));
      }
  } catch (const Error& e) {
    record("erds", e);
  }

  try {
    std::vector<TrialRecording> all = eeg_trials[0];
    all.insert(all.end(), eeg_trials[1].begin(), eeg_trials[1].end());
    CsvFile csv(dir / "band_tests.csv", summary.written);
    csv.row("band", "participant", "t", "df", "p");
    for (const auto& band : bands) {
      const auto tests = neuro::band_power_condition_test(all, band, cfg.neuro.erds_channel, cfg.neuro.band_test_start,
                                                          cfg.neuro.band_test_end, eo);
      for (const auto& [pid, r] : tests) csv.row(band.name, pid, r.statistic, r.df1, r.p_value);
    }
  } catch (const Error& e) {
    record("band_tests", e);
  }
}

}  // namespace

std::vector<fs::path> expected_outputs(const ExperimentConfig& cfg) {
  const std::string model = evaluation::to_string(cfg.model);
  std::vector<fs::path> out{cfg.out_dir / "timelines.csv", cfg.out_dir / "gating.csv", cfg.out_dir / "errors.csv",
                            cfg.out_dir / "run_metadata.txt", cfg.out_dir / ("median_" + model + ".csv"),
                            cfg.out_dir / ("latency_" + model + ".csv")};
  if (!cfg.fusion_modes.empty()) {
    out.push_back(cfg.out_dir / "median_fusion.csv");
    out.push_back(cfg.out_dir / "latency_fusion.csv");
  }
  return out;
}

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  log(options, "loading " + cfg.manifest_path().string());
  return run_experiment(cfg, load_dataset(cfg.root, cfg.manifest_path()), options);
}

RunSummary run_experiment(const ExperimentConfig& cfg, std::vector<TrialRecording> trials, const RunOptions& options) {
  validate_config(cfg);
  RunSummary summary;
  std::sort(trials.begin(), trials.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });

  std::set<Modality> needed = cfg.modalities;
  if (!cfg.fusion_modes.empty()) needed.insert(cfg.fusion_modalities.begin(), cfg.fusion_modalities.end());
  log(options, "building features for " + std::to_string(trials.size()) + " trials");
  const auto feats = build_all_features(cfg, trials, needed, options);

  std::set<int> participants;
  for (const auto& t : trials) participants.insert(t.participant_id);

  std::vector<evaluation::SweepJob> jobs;
  for (Modality m : cfg.modalities) {
    for (int pid : participants) {
      std::vector<FeatureSequence> seqs;
      for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].participant_id != pid) continue;
        const auto it = feats[i].find(m);
        if (it != feats[i].end()) seqs.push_back(it->second);
      }
      auto g = gate(pid, std::string(to_string(m)), evaluation::labels_of(seqs), cfg.min_trials_single, cfg);
      summary.gating.push_back(g);
      if (g.included) jobs.push_back(evaluation::make_modality_job(pid, std::move(seqs), cfg.recipe_for(m), cfg.scheme_for(pid), cfg.grid));
    }
  }
  for (const auto& spec : cfg.fusion_specs()) {
    for (int pid : participants) {
      std::vector<fusion::FusionMember> members;
      for (Modality m : spec.modalities) members.push_back({m, {}});
      for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].participant_id != pid) continue;
        const bool all = std::all_of(spec.modalities.begin(), spec.modalities.end(),
                                     [&](Modality m) { return feats[i].count(m) > 0; });
        if (!all) continue;
        for (auto& mem : members) mem.seqs.push_back(feats[i].at(mem.modality));
      }
      auto g = gate(pid, spec.tag(), evaluation::labels_of(members.front().seqs), cfg.min_trials_fusion, cfg);
      summary.gating.push_back(g);
      if (!g.included) continue;
      // Fusion always uses LDA members, so it uses the plain repeated scheme.
      auto scheme = evaluation::CvScheme::repeated(cfg.cv_k, cfg.cv_repeats, cfg.scheme_for(pid).seed);
      scheme.require_both_classes_per_fold = cfg.require_both_classes_per_fold;
      jobs.push_back(fusion::make_fusion_job(pid, std::move(members), spec, scheme, cfg.grid));
    }
  }

  log(options, "running " + std::to_string(jobs.size()) + " sweeps on " + std::to_string(options.jobs) + " workers");
  summary.timelines = evaluation::run_sweeps(jobs, {cfg.grid, options.jobs});
  for (const auto& tl : summary.timelines)
    for (std::size_t w = 0; w < tl.windows.size(); ++w)
      if (tl.windows[w].missing())
        summary.errors.push_back({tl.participant_id, tl.tag, tl.model, tl.window_end_times_s[w], tl.windows[w].error});

  // ---- outputs ----
  fs::create_directories(cfg.out_dir / "timelines");
  auto& written = summary.written;
  {
    CsvFile csv(cfg.out_dir / "timelines.csv", written);
    timeline_header(csv);
    for (const auto& tl : summary.timelines) write_timeline_rows(csv, tl);
  }
  for (const auto& tl : summary.timelines) {
    CsvFile csv(cfg.out_dir / "timelines" / (participant_dir(tl.participant_id) + "_" + file_safe(tl.tag) + "_" + tl.model + ".csv"), written);
    timeline_header(csv);
    write_timeline_rows(csv, tl);
  }
  {
    CsvFile csv(cfg.out_dir / "gating.csv", written);
    csv.row("participant", "set", "usable_trials", "handover", "non_handover", "included", "reason");
    for (const auto& g : summary.gating)
      csv.row(g.participant_id, g.tag, g.usable_trials, g.handover, g.non_handover,
              std::string(g.included ? "yes" : "no"), g.reason);
  }

  std::vector<AucTimeline> single, fused;
  for (const auto& tl : summary.timelines) (tl.tag.find(':') == std::string::npos ? single : fused).push_back(tl);
  const std::string model = evaluation::to_string(cfg.model);
  auto guarded = [&](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      summary.errors.push_back({0, what, model, std::nan(""), e.what()});
    }
  };
  guarded("median", [&] { write_median(cfg.out_dir / ("median_" + model + ".csv"), by_tag(single), written); });
  guarded("latency", [&] { write_latency(cfg.out_dir / ("latency_" + model + ".csv"), by_tag(single), cfg, written); });
  if (!cfg.fusion_modes.empty()) {
    guarded("median_fusion", [&] { write_median(cfg.out_dir / "median_fusion.csv", by_tag(fused), written); });
    guarded("latency_fusion", [&] { write_latency(cfg.out_dir / "latency_fusion.csv", by_tag(fused), cfg, written); });
  }
  if (cfg.neuro.enabled) run_neuro(cfg, trials, feats, summary);

  {
    CsvFile csv(cfg.out_dir / "errors.csv", written);
    csv.row("participant", "tag", "model", "window_end", "error");
    for (const auto& e : summary.errors) csv.row(e.participant_id, e.tag, e.model, e.window_end_s, e.message);
  }
  {
    const fs::path meta = cfg.out_dir / "run_metadata.txt";
    std::ofstream out(meta);
    if (!out) throw DataError("cannot write " + meta.string());
    written.push_back(meta);
    out << to_config_text(cfg) << "\n[meta]\nconfig_hash = " << text::hex64(config_hash(cfg))
        << "\nseed = " << cfg.seed.value_or(0) << "\nversion = " << HANDOVER_VERSION
        << "\nlevel_rule = first window end starting " << cfg.run_length << " consecutive windows at or above the level"
        << "\nanova_grouping = " << evaluation::LatencyTable::kAnovaGrouping
        << "\nsplit_seed = derive(participant seed, window, repeat, fold)"
        << "\nerrors = " << summary.errors.size() << "\n";
  }
  log(options, std::to_string(summary.timelines.size()) + " timelines, " + std::to_string(summary.errors.size()) +
                   " errors; outputs in " + cfg.out_dir.string());
  return summary;
}

}  // namespace handover::app
