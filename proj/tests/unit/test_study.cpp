#include "echobeat/beats.hpp"
#include "echobeat/decode.hpp"
#include "echobeat/error.hpp"
#include "echobeat/phantom.hpp"
#include "echobeat/study.hpp"

#include <doctest.h>

#include <oracles.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace echobeat;

namespace {

BeatRecord beat(double ivsd, double lvidd, double lvpwd, double lvids = 3.0) {
  BeatRecord b;
  b.diastolic = {ivsd, lvidd, lvpwd};
  b.systolic = {ivsd + 0.3, lvids, lvpwd + 0.3};
  return b;
}

std::vector<BeatRecord> random_beats(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> wall(0.6, 1.6), cavity(3.5, 6.0), sys(2.0, 3.4);
  std::vector<BeatRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(beat(wall(rng), cavity(rng), wall(rng), sys(rng)));
  return out;
}

void check_same(const MeasureStats& a, const MeasureStats& b) {
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-14));
  CHECK(a.median == b.median);
  CHECK(a.min == b.min);
  CHECK(a.max == b.max);
  REQUIRE(a.sd.has_value() == b.sd.has_value());
  if (a.sd) CHECK(*a.sd == doctest::Approx(*b.sd).epsilon(1e-12));
}

}  // namespace

TEST_CASE("summarize: single beat") {
  const std::vector<BeatRecord> beats{beat(1.2, 4.6, 1.1)};
  const auto s = summarize(beats, std::nullopt);
  CHECK(s.n_beats == 1);
  CHECK(s.per_beat.size() == 1);
  CHECK(s.ivsd.mean == 1.2);
  CHECK(s.lvidd.mean == 4.6);
  CHECK(s.lvpwd.mean == 1.1);
  CHECK_FALSE(s.ivsd.sd.has_value());
  CHECK_FALSE(s.lvids.sd.has_value());
  CHECK_FALSE(s.lvh_flag.has_value());
}

TEST_CASE("summarize: sample statistics") {
  const std::vector<BeatRecord> beats{beat(1.0, 4.0, 1.0), beat(1.2, 4.0, 1.0), beat(1.4, 4.0, 1.0)};
  const auto s = summarize(beats, std::nullopt);
  CHECK(s.ivsd.mean == doctest::Approx(1.2));
  CHECK(*s.ivsd.sd == doctest::Approx(0.2));
  CHECK(s.ivsd.min == 1.0);
  CHECK(s.ivsd.max == 1.4);
  CHECK(*s.lvidd.sd == 0.0);
  CHECK(s.value(s.ivsd) == s.ivsd.mean);

  const auto m = summarize(beats, std::nullopt, Aggregation::Median);
  CHECK(m.value(m.ivsd) == 1.2);
}

TEST_CASE("summarize: LVH rule") {
  const std::vector<BeatRecord> beats{beat(1.2, 4.6, 0.9)};
  const auto any = summarize(beats, LvhRule{1.1, 1.1, Combinator::Any});
  REQUIRE(any.lvh_flag.has_value());
  CHECK(*any.lvh_flag);
  CHECK_FALSE(*summarize(beats, LvhRule{1.1, 1.1, Combinator::All}).lvh_flag);
  // Threshold is inclusive.
  CHECK(*summarize(beats, LvhRule{1.2, 0.9, Combinator::All}).lvh_flag);
  CHECK_THROWS_AS(summarize(beats, LvhRule{0.0, 1.1, Combinator::Any}), Error);
}

TEST_CASE("summarize: empty input") {
  try {
    (void)summarize(std::vector<BeatRecord>{}, std::nullopt);
    FAIL("expected EmptyBeats");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyBeats);
  }
}

TEST_CASE("summarize: invariants") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> thr(0.5, 1.7), drop(0.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    auto beats = random_beats(rng, 2 + static_cast<std::size_t>(trial % 9));
    const auto s = summarize(beats, std::nullopt);
    CHECK(s.n_beats == s.per_beat.size());
    for (const auto* m : {&s.ivsd, &s.lvidd, &s.lvpwd, &s.lvids}) {
      CHECK(m->min <= m->mean);
      CHECK(m->mean <= m->max);
      CHECK(*m->sd >= 0.0);
    }
    std::vector<double> ivs;
    for (const auto& b : beats) ivs.push_back(b.diastolic.ivs);
    CHECK(*s.ivsd.sd == doctest::Approx(oracle::sample_sd(ivs)).epsilon(1e-12));

    // Permutation invariance.
    auto shuffled = beats;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto p = summarize(shuffled, std::nullopt);
    check_same(s.ivsd, p.ivsd);
    check_same(s.lvidd, p.lvidd);
    check_same(s.lvpwd, p.lvpwd);
    check_same(s.lvids, p.lvids);

    // A duplicate beat keeps min/max and cannot widen the range.
    auto dup = beats;
    dup.push_back(beats[static_cast<std::size_t>(trial) % beats.size()]);
    const auto d = summarize(dup, std::nullopt);
    CHECK(d.ivsd.min == s.ivsd.min);
    CHECK(d.ivsd.max == s.ivsd.max);
    CHECK(beat_spread(dup).lvidd.range <= beat_spread(beats).lvidd.range);

    // Lowering a threshold never clears the flag.
    for (Combinator c : {Combinator::Any, Combinator::All}) {
      LvhRule rule{thr(rng), thr(rng), c};
      const bool before = *summarize(beats, rule).lvh_flag;
      rule.ivs_threshold_cm = std::max(0.01, rule.ivs_threshold_cm - drop(rng));
      rule.lvpw_threshold_cm = std::max(0.01, rule.lvpw_threshold_cm - drop(rng));
      const bool after = *summarize(beats, rule).lvh_flag;
      CHECK((!before || after));
    }
  }
}

TEST_CASE("beat_spread: examples") {
  const std::vector<BeatRecord> same{beat(1.1, 4.5, 0.9), beat(1.1, 4.5, 0.9), beat(1.1, 4.5, 0.9)};
  const auto z = beat_spread(same);
  CHECK(z.ivsd.range == 0.0);
  CHECK(z.ivsd.sd == 0.0);
  CHECK(z.lvids.range == 0.0);

  const auto two = beat_spread(std::vector<BeatRecord>{beat(1.0, 4.5, 0.9), beat(1.4, 4.5, 0.9)});
  CHECK(two.ivsd.range == doctest::Approx(0.4));
  CHECK(two.ivsd.sd == doctest::Approx(0.2828427).epsilon(1e-6));

  try {
    (void)beat_spread(std::vector<BeatRecord>{beat(1.0, 4.5, 0.9)});
    FAIL("expected InsufficientBeats");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientBeats);
  }
}

TEST_CASE("beat_spread: noise-free mock study stays within the quantization bound") {
  PhantomConfig cfg;
  const auto traj = generate_trajectory(cfg);
  const Extent extent = covering_extent(traj, 10.0);
  const auto stack = render_heatmaps(traj, MockModelConfig{}, extent);
  const auto records = decode_video(stack, DecodeConfig{}, traj.calibration);
  const auto beats = detect_beats(series_from_records(records, cfg.fps), BeatConfig{});
  REQUIRE(beats.size() >= 2);
  const auto spread = beat_spread(beats);
  const double bound = 2.0 * std::sqrt(2.0) * cfg.cm_per_pixel;
  CHECK(spread.ivsd.range <= bound);
  CHECK(spread.lvidd.range <= bound);
  CHECK(spread.lvpwd.range <= bound);
  CHECK(spread.lvids.range <= bound);
}
