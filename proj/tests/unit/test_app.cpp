#include "helpers.hpp"

#include "handover/app/config.hpp"
#include "handover/app/convert.hpp"
#include "handover/app/report.hpp"
#include "handover/app/run.hpp"
#include "handover/app/synth.hpp"
#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace handover;
using namespace handover::app;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::string config_text(const fs::path& root, const fs::path& out, const std::string& extra = "") {
  return "[dataset]\nroot = " + root.string() +
         "\n\n[experiment]\nmodalities = gaze\nmodel = lda\nseed = 17\n\n[cv]\nk = 5\nrepeats = 1\n" + extra +
         "\n[output]\ndir = " + out.string() + "\n";
}

SynthProfile small_profile() {
  SynthProfile p;
  p.participants = 2;
  p.trials_per_condition = 10;
  p.seed = 4;
  p.gaze.effect = 0.6;
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(HANDOVER_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::istringstream in(testing::read_file(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("config round trip and hashing") {
  testing::TempDir dir("cfg");
  const auto cfg = parse_config_text(config_text(dir.path(), dir.path() / "out", "[windows]\nstep = 0.5\n"), "c.ini", dir.path());
  CHECK(cfg.cv_k == 5);
  CHECK(cfg.grid.step == 0.5);
  CHECK(*cfg.seed == 17);
  const auto again = parse_config_text(to_config_text(cfg), "again", dir.path());
  CHECK(to_config_text(again) == to_config_text(cfg));
  CHECK(config_hash(again) == config_hash(cfg));
  auto moved = cfg;
  moved.out_dir = dir.path() / "elsewhere";
  CHECK(config_hash(moved) == config_hash(cfg));
  auto reseeded = cfg;
  reseeded.seed = 18;
  CHECK(config_hash(reseeded) != config_hash(cfg));
  CHECK(cfg.scheme_for(1).seed != cfg.scheme_for(2).seed);
}

TEST_CASE("config errors name the field and line") {
  testing::TempDir dir("cfgerr");
  auto error_of = [&](const std::string& text) -> std::pair<std::string, std::size_t> {
    try {
      validate_config(parse_config_text(text, "c.ini", dir.path()));
    } catch (const ConfigError& e) {
      return {e.field(), e.line()};
    }
    return {"", 0};
  };
  CHECK(error_of(config_text(dir.path(), "o", "bogus = 1\n")).first == "cv.bogus");
  CHECK(error_of(config_text(dir.path(), "o", "k = 4\n")).first == "cv.k");
  CHECK(error_of(config_text(dir.path(), "o", "k = x\n")).second == 12);
  const auto no_seed = error_of("[dataset]\nroot = " + dir.path().string() + "\n[experiment]\nmodalities = gaze\n");
  CHECK(no_seed.first == "experiment.seed");
  CHECK(error_of(config_text(dir.path() / "missing", "o")).first == "dataset.root");
  CHECK(!error_of(config_text(dir.path(), "o", "[windows]\nlast_end = 5.9\n")).first.empty());
  CHECK(error_of("[dataset\n").second == 1);
}

TEST_CASE("synthetic profiles round trip") {
  auto p = small_profile();
  p.modalities = {Modality::Gaze, Modality::Motion};
  p.motion.injection_s = 0.5;
  const auto q = parse_synth_profile_text(to_profile_text(p));
  CHECK(to_profile_text(q) == to_profile_text(p));
  CHECK(q.motion.injection_s == 0.5);
  CHECK_THROWS(parse_synth_profile_text("[gaze]\neffect = 2\n"));
  CHECK_THROWS(parse_synth_profile_text("[synth]\nunknown = 1\n"));
  // Generation is deterministic per trial.
  const auto a = synthesize_trial(p, 1, 3, Condition::Handover);
  const auto b = synthesize_trial(p, 1, 3, Condition::Handover);
  CHECK(a.gaze->gaze_xy.values.isApprox(b.gaze->gaze_xy.values));
  CHECK(synthesize(p).size() == 2u * 30u);
}

TEST_CASE("small runs are complete, reproducible and replayable") {
  testing::TempDir dir("run");
  const auto data = dir.path() / "data";
  write_synthetic_dataset(small_profile(), data);
  const auto out = dir.path() / "out";
  write(dir.path() / "run.ini", config_text(data, out));
  const auto cfg = parse_config(dir.path() / "run.ini");
  validate_config(cfg);

  const auto summary = run_experiment(cfg);
  CHECK(summary.exit_code() == 0);
  REQUIRE(summary.timelines.size() == 2);
  for (const auto& p : expected_outputs(cfg)) CHECK_MESSAGE(fs::exists(p), p.string());
  const auto per_participant = csv_lines(out / "timelines" / "p01_gaze_lda.csv");
  CHECK(per_participant.size() == 45);
  const auto timelines = testing::read_file(out / "timelines.csv");
  CHECK(csv_lines(out / "timelines.csv").size() == 1 + 2 * 44);
  CHECK(csv_lines(out / "gating.csv").size() == 3);
  CHECK(testing::read_file(out / "run_metadata.txt").find("config_hash = ") != std::string::npos);

  // Same config again: byte-identical, also with more workers.
  const auto rerun = run_experiment(cfg, {4, nullptr});
  CHECK(rerun.exit_code() == 0);
  CHECK(testing::read_file(out / "timelines.csv") == timelines);

  // The metadata file replays the run.
  auto replay = parse_config(out / "run_metadata.txt");
  replay.out_dir = dir.path() / "replay";
  run_experiment(replay);
  CHECK(testing::read_file(dir.path() / "replay" / "timelines.csv") == timelines);
  CHECK(config_hash(replay) == config_hash(cfg));

  const auto figures = make_report(out);
  REQUIRE(!figures.empty());
  const auto rows = csv_lines(out / "figures" / "median_lda.csv");
  CHECK(rows.size() == 45);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cells;
    std::istringstream row(rows[i]);
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 6);
    const double med = std::stod(cells[2]), lo = std::stod(cells[3]), hi = std::stod(cells[4]);
    CHECK(lo <= med);
    CHECK(med <= hi);
    CHECK(cells[5] == "0");
  }

  fs::remove(out / "gating.csv");
  try {
    make_report(out);
    FAIL("report accepted an incomplete directory");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("gating.csv") != std::string::npos);
  }
}

TEST_CASE("participants below the trial minimum are gated out") {
  testing::TempDir dir("gate");
  const auto data = dir.path() / "data";
  write_synthetic_dataset(small_profile(), data);
  auto cfg = parse_config_text(config_text(data, dir.path() / "out", "[experiment]\nmin_trials_single = 31\n"), "c", dir.path());
  const auto s = run_experiment(cfg);
  CHECK(s.timelines.empty());
  REQUIRE(s.gating.size() == 2);
  CHECK(!s.gating[0].included);
  CHECK(s.gating[0].usable_trials == 30);
  CHECK(!s.gating[0].reason.empty());
}

TEST_CASE("archive conversion round trips") {
  testing::TempDir dir("conv");
  auto p = small_profile();
  p.participants = 1;
  p.trials_per_condition = 2;
  p.modalities = {Modality::Gaze, Modality::Motion};
  const auto trials = synthesize(p);
  const auto archive = dir.path() / "archive" / "sub-01";
  std::string events = "trial,condition,onset_s\n";
  for (const auto& t : trials) {
    events += std::to_string(t.trial_id) + "," + std::string(to_string(t.condition)) + ",0\n";
    char stem[32];
    std::snprintf(stem, sizeof stem, "trial-%03d", t.trial_id);
    std::string gaze = "time,x,y,refx,refy\n", motion = "time,x,y,z\n";
    const auto& g = *t.gaze;
    for (Eigen::Index i = 0; i < g.gaze_xy.samples(); ++i) {
      gaze += text::format_double(g.gaze_xy.time_at(i));
      for (int c = 0; c < 2; ++c) gaze += "," + text::format_double(g.gaze_xy.values(i, c));
      for (int c = 0; c < 2; ++c) gaze += "," + text::format_double(g.reference_xy.values(i, c));
      gaze += "\n";
    }
    const auto& m = t.motion->hand_xyz;
    for (Eigen::Index i = 0; i < m.samples(); ++i) {
      motion += text::format_double(m.time_at(i));
      for (int c = 0; c < 3; ++c) motion += "," + text::format_double(m.values(i, c));
      motion += "\n";
    }
    write(archive / (std::string(stem) + "_gaze.csv"), gaze);
    write(archive / (std::string(stem) + "_motion.csv"), motion);
  }
  write(archive / "events.csv", events);
  CHECK(convert_dataset(dir.path() / "archive", dir.path() / "converted") == 6);
  const auto loaded = load_dataset(dir.path() / "converted", dir.path() / "converted" / "manifest.txt");
  REQUIRE(loaded.size() == trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    CHECK(loaded[i].condition == trials[i].condition);
    CHECK(loaded[i].motion->hand_xyz.values == trials[i].motion->hand_xyz.values);
    CHECK(!loaded[i].eeg);
  }
  CHECK_THROWS(convert_dataset(dir.path() / "nothing", dir.path() / "c2"));
}

TEST_CASE("command-line exit codes") {
  testing::TempDir dir("cli");
  const auto data = dir.path() / "data";
  write_synthetic_dataset(small_profile(), data);
  write(dir.path() / "good.ini", config_text(data, dir.path() / "out"));
  write(dir.path() / "grid.ini", config_text(data, dir.path() / "out2", "[windows]\nlast_end = 5.9\n"));
  write(dir.path() / "typo.ini", config_text(data, dir.path() / "out3", "kk = 3\n"));
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  CHECK(cli("validate-config --config " + q(dir.path() / "good.ini")) == 0);
  CHECK(cli("validate-config --config " + q(dir.path() / "grid.ini")) == 2);
  CHECK(cli("run --config " + q(dir.path() / "grid.ini")) == 2);
  CHECK(cli("run --config " + q(dir.path() / "typo.ini")) == 2);
  CHECK(cli("run --no-such-flag") == 2);
  CHECK(cli("report " + q(dir.path() / "nowhere")) == 1);
  CHECK(cli("run --config " + q(dir.path() / "good.ini") + " --jobs 2") == 0);
  CHECK(cli("report " + q(dir.path() / "out")) == 0);
  CHECK(fs::exists(dir.path() / "out" / "figures" / "median_lda.csv"));
  CHECK(cli("synth --out " + q(dir.path() / "s2")) == 0);
  CHECK(fs::exists(dir.path() / "s2" / "manifest.txt"));
}
