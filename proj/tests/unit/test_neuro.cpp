#include "helpers.hpp"

#include "handover/core/error.hpp"
#include "handover/neuro/neuro.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace handover;
using namespace handover::neuro;

namespace {

features::FeatureSequence gaze_at(const std::vector<std::pair<double, double>>& points) {
  Matrix v(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    v(static_cast<Eigen::Index>(i), 0) = points[i].first;
    v(static_cast<Eigen::Index>(i), 1) = points[i].second;
  }
  features::FeatureSequence s;
  s.series = TimeSeries(0.0, 0.04, v);
  return s;
}

// 250 Hz EEG over [-6, 7) s with the given waveform on every listed channel.
TrialRecording eeg_trial(int pid, int id, Condition c, const std::vector<std::string>& channels,
                         const std::function<double(double)>& wave) {
  const Eigen::Index n = 13 * 250;
  Matrix v(n, static_cast<Eigen::Index>(channels.size()));
  for (Eigen::Index i = 0; i < n; ++i) v.row(i).setConstant(wave(-6.0 + static_cast<double>(i) / 250.0));
  TrialRecording t;
  t.participant_id = pid;
  t.trial_id = id;
  t.condition = c;
  t.eeg = RawEeg{channels, TimeSeries(-6.0, 1.0 / 250.0, v), false};
  return t;
}

}  // namespace

TEST_CASE("zone rectangles are half-open") {
  const auto z = Zone::rect("A", 0, 0, 10, 10);
  CHECK(z.contains(0, 0));
  CHECK(z.contains(9.999, 9.999));
  CHECK(!z.contains(10, 5));
  CHECK(!z.contains(5, 10));
  CHECK(!z.contains(-1e-9, 5));
  // Adjacent rectangles share an edge without overlapping.
  CHECK_NOTHROW(ZoneMap({Zone::rect("A", 0, 0, 10, 10), Zone::rect("B", 10, 0, 20, 10)}));
  CHECK_THROWS_AS(ZoneMap({Zone::rect("A", 0, 0, 10, 10), Zone::rect("B", 9, 0, 20, 10)}), SpecError);
  CHECK_THROWS_AS(ZoneMap({Zone::rect("Other", 0, 0, 1, 1)}), SpecError);
  CHECK_THROWS_AS(Zone::rect("A", 0, 0, 0, 1), SpecError);
}

TEST_CASE("polygon zones use the even-odd rule") {
  const auto tri = Zone::poly("T", {{0, 0}, {10, 0}, {0, 10}});
  CHECK(tri.contains(2, 2));
  CHECK(!tri.contains(6, 6));
  CHECK(!tri.contains(-1, 1));
  const ZoneMap m({tri, Zone::rect("R", 20, 20, 30, 30)});
  CHECK(m.classify(1, 1) == 0);
  CHECK(m.classify(25, 25) == 1);
  CHECK(m.classify(100, 100) == 2);
  CHECK(m.names().back() == "Other");
  CHECK_THROWS_AS(Zone::poly("P", {{0, 0}, {1, 1}}), SpecError);
}

TEST_CASE("default zones classify their centres") {
  const auto m = ZoneMap::defaults();
  const auto names = m.names();
  CHECK(names[m.classify(0, 0)] == "Robot");
  CHECK(names[m.classify(-500, 50)] == "PosB");
  CHECK(names[m.classify(500, 50)] == "PosC");
  CHECK(names[m.classify(0, 900)] == "Other");
}

TEST_CASE("zone files report the offending line") {
  const auto ok = parse_zone_map_text("# zones\nzone A rect 0 0 1 1\n\nzone B polygon 2 2 3 2 3 3\n");
  CHECK(ok.names().size() == 3);
  auto line_of = [](const std::string& text) {
    try {
      parse_zone_map_text(text, "z.txt");
    } catch (const DataError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("zone A rect 0 0 1 1\nzone B rect 0 0 x 1\n") == 2);
  CHECK(line_of("\n\nzone A circle 1 2 3\n") == 3);
  CHECK(line_of("zone A rect 0 0 1\n") == 1);
  CHECK(line_of("zone A polygon 0 0 1 1 2\n") == 1);
  CHECK(line_of("zone A rect 0 0 2 2\nzone B rect 1 1 3 3\n") == 2);
  CHECK(line_of("zone Other rect 0 0 1 1\n") == 1);
  CHECK(line_of("# nothing\n") > 0);
  CHECK_THROWS_AS(parse_zone_map("/nonexistent/zones.txt"), DataError);
}

TEST_CASE("gaze zone frequencies") {
  // 30% of samples in PosC, the rest on the robot.
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(i % 10 < 3 ? std::pair{500.0, 0.0} : std::pair{0.0, 0.0});
  const auto table = gaze_zone_frequencies({gaze_at(pts), gaze_at(pts)}, {Condition::Handover, Condition::Solo},
                                           ZoneMap::defaults(), 0.0, 40.0);
  REQUIRE(table.zones.size() == 4);
  const auto& row = table.percent.at(Condition::Handover);
  CHECK(std::abs(row[2] - 30.0) <= 0.01);
  CHECK(std::abs(row[0] - 70.0) <= 0.01);
  CHECK(table.samples.at(Condition::Solo) == 1000);
  double sum = 0.0;
  for (double p : row) sum += p;
  CHECK(sum == doctest::Approx(100.0));
  // Only [0, 4) s: the first 100 samples.
  const auto early = gaze_zone_frequencies({gaze_at(pts)}, {Condition::Joint}, ZoneMap::defaults(), 0.0, 4.0);
  CHECK(early.samples.at(Condition::Joint) == 100);
  CHECK_THROWS_AS(gaze_zone_frequencies({gaze_at(pts)}, {Condition::Joint}, ZoneMap::defaults(), 50.0, 60.0),
                  NumericError);
  CHECK_THROWS_AS(gaze_zone_frequencies({gaze_at(pts)}, {}, ZoneMap::defaults(), 0.0, 4.0), DimensionError);
}

TEST_CASE("band specifications") {
  CHECK_NOTHROW(BandSpec::mu().validate());
  CHECK_NOTHROW(BandSpec::beta().validate());
  CHECK_NOTHROW(BandSpec::gamma().validate());
  CHECK_THROWS_AS((BandSpec{"x", 0.0, 5.0}.validate()), SpecError);
  CHECK_THROWS_AS((BandSpec{"x", 12.0, 8.0}.validate()), SpecError);
  CHECK_THROWS_AS((BandSpec{"x", 30.0, 45.0}.validate()), SpecError);
}

TEST_CASE("ERP grand average locates a negative deflection") {
  const std::vector<std::string> ch{"C3", "C4", "Cz"};
  std::vector<TrialRecording> trials;
  Rng rng(21);
  for (int p = 1; p <= 3; ++p)
    for (int k = 0; k < 4; ++k) {
      const double offset = rng.normal(0.0, 5.0);
      trials.push_back(eeg_trial(p, k + 1, Condition::Handover, ch, [&](double t) {
        return offset - 8.0 * std::exp(-0.5 * std::pow((t + 1.7) / 0.1, 2));
      }));
    }
  const auto erp = erp_grand_average(trials, ch);
  CHECK(erp.participants == 3);
  CHECK(erp.trials == 12);
  Eigen::Index imin = 0;
  erp.mean.values.col(0).minCoeff(&imin);
  CHECK(std::abs(erp.mean.time_at(imin) + 1.7) <= 0.1);
  CHECK(erp.mean.values(imin, 0) == doctest::Approx(-8.0).epsilon(1e-3));
  // Baseline correction removes the per-trial offsets.
  CHECK(std::abs(erp.mean.values(0, 0)) < 1e-9);
  CHECK(erp.variance.maxCoeff() < 1e-9);
  CHECK_THROWS_AS(erp_grand_average({}, ch), NumericError);
  CHECK_THROWS_AS(erp_grand_average(trials, {"O1"}), SpecError);
}

TEST_CASE("ERDS of a halved mu rhythm is -75%") {
  using std::numbers::pi;
  const std::vector<std::string> ch{"C3"};
  std::vector<TrialRecording> trials;
  for (int k = 0; k < 3; ++k)
    trials.push_back(eeg_trial(1, k + 1, Condition::Handover, ch, [k](double t) {
      return (t < 0.0 ? 10.0 : 5.0) * std::sin(2.0 * pi * 10.0 * t + k);
    }));
  const auto r = erds(trials, BandSpec::mu(), "C3");
  double baseline = 0.0, late = 0.0;
  int nb = 0, nl = 0;
  for (Eigen::Index i = 0; i < r.samples(); ++i) {
    const double t = r.time_at(i);
    if (t >= -4.0 && t < -3.0) {
      baseline += r.values(i, 0);
      ++nb;
    }
    if (t >= 2.0 && t < 4.0) {
      late += r.values(i, 0);
      ++nl;
    }
  }
  CHECK(std::abs(baseline / nb) < 1e-9);
  CHECK(late / nl == doctest::Approx(-0.75).epsilon(0.01));
}

TEST_CASE("band-power condition test separates a desynchronising condition") {
  using std::numbers::pi;
  const std::vector<std::string> ch{"C3"};
  std::vector<TrialRecording> trials;
  Rng rng(22);
  for (int k = 0; k < 6; ++k) {
    const bool ho = k % 2 == 0;
    const double phase = rng.uniform(0.0, 2.0 * pi);
    trials.push_back(eeg_trial(1, k + 1, ho ? Condition::Handover : Condition::Solo, ch, [=](double t) {
      return (ho && t >= 0.0 ? 4.0 : 10.0) * std::sin(2.0 * pi * 10.0 * t + phase);
    }));
  }
  const auto res = band_power_condition_test(trials, BandSpec::mu(), "C3", 1.0, 3.0);
  REQUIRE(res.count(1));
  CHECK(res.at(1).statistic < -10.0);
  CHECK(res.at(1).p_value < 1e-6);
  trials.erase(trials.begin() + 1);
  trials.erase(trials.begin() + 2);
  trials.erase(trials.begin() + 3);
  CHECK_THROWS_AS(band_power_condition_test(trials, BandSpec::mu(), "C3", 1.0, 3.0), NumericError);
}
