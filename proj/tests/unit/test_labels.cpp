#include "echobeat/decode.hpp"
#include "echobeat/error.hpp"
#include "echobeat/labels.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace echobeat;

namespace {

const Extent kExtent{48, 64};

PointQuad line_points() { return PointQuad{Point2{10, 5}, Point2{10, 15}, Point2{10, 35}, Point2{10, 45}}; }

std::size_t ones(const LabelImage& l, Channel c) {
  std::size_t n = 0;
  for (float v : std::span<const float>(l.view().channel(c))) n += v == 1.0f;
  return n;
}

struct Instance {
  std::vector<double> pred;
  std::vector<double> label;
};

Instance random_instance(std::mt19937_64& rng, std::size_t channels, std::size_t h, std::size_t w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  in.pred.resize(channels * h * w);
  in.label.assign(channels * h * w, 0.0);
  for (auto& p : in.pred) p = u(rng);
  std::uniform_int_distribution<std::size_t> pix(0, h * w - 1);
  for (std::size_t c = 0; c < channels; ++c) in.label[c * h * w + pix(rng)] = 1.0;
  return in;
}

}  // namespace

TEST_CASE("rasterize: nearest pixel without jitter") {
  PointQuad pts = line_points();
  pts[0] = Point2{10.2, 20.7};
  const auto label = rasterize(pts, kExtent, JitterConfig{0.0, 1});
  CHECK(label.at(Channel::IvsTop, 21, 10) == 1.0f);
  CHECK(label.at(Channel::LvSeptal, 15, 10) == 1.0f);
  for (Channel c : kChannels) CHECK(ones(label, c) == 1);
  double total = 0.0;
  for (float v : label.values()) total += v;
  CHECK(total == 4.0);
}

TEST_CASE("rasterize: rounding half away from zero and border clamping") {
  PointQuad pts = line_points();
  pts[0] = Point2{10.5, 20.5};
  pts[1] = Point2{-7.0, 3.0};
  pts[2] = Point2{500.0, 900.0};
  pts[3] = Point2{-0.5, -0.4};
  const auto label = rasterize(pts, kExtent, JitterConfig{0.0, 0});
  CHECK(label.at(Channel::IvsTop, 21, 11) == 1.0f);
  CHECK(label.at(Channel::LvSeptal, 3, 0) == 1.0f);
  CHECK(label.at(Channel::LvPosterior, kExtent.height - 1, kExtent.width - 1) == 1.0f);
  CHECK(label.at(Channel::PwBottom, 0, 0) == 1.0f);
  for (Channel c : kChannels) CHECK(ones(label, c) == 1);
}

TEST_CASE("rasterize: jitter spread matches sigma (Monte Carlo)") {
  const Extent big{400, 400};
  PointQuad pts;
  pts.fill(Point2{200.3, 199.6});
  std::vector<double> xs, ys;
  for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
    const auto label = rasterize(pts, big, JitterConfig{2.0, seed});
    const auto ch = label.view().channel(Channel::IvsTop);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      if (ch[i] == 1.0f) {
        xs.push_back(static_cast<double>(i % big.width));
        ys.push_back(static_cast<double>(i / big.width));
      }
    }
  }
  REQUIRE(xs.size() == 10'000);
  const double sx = oracle::sample_sd(xs);
  const double sy = oracle::sample_sd(ys);
  CHECK(sx >= 1.85);
  CHECK(sx <= 2.15);
  CHECK(sy >= 1.85);
  CHECK(sy <= 2.15);
}

TEST_CASE("rasterize: deterministic per seed") {
  const JitterConfig cfg{2.0, 42};
  CHECK(rasterize(line_points(), kExtent, cfg) == rasterize(line_points(), kExtent, cfg));
  bool any_diff = false;
  for (std::uint64_t s = 1; s < 10 && !any_diff; ++s) {
    any_diff = !(rasterize(line_points(), kExtent, JitterConfig{2.0, s}) == rasterize(line_points(), kExtent, cfg));
  }
  CHECK(any_diff);
}

TEST_CASE("rasterize: rejects negative sigma") {
  CHECK_THROWS_AS(rasterize(line_points(), kExtent, JitterConfig{-1.0, 0}), Error);
}

TEST_CASE("rasterize then decode recovers points within half a pixel diagonal") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 63.0), uy(0.0, 47.0);
  const DecodeConfig dc;
  for (int trial = 0; trial < 200; ++trial) {
    PointQuad pts;
    for (auto& p : pts) p = Point2{ux(rng), uy(rng)};
    const auto label = rasterize(pts, kExtent, JitterConfig{0.0, 0});
    const auto decoded = decode_frame(label.view(), dc);
    for (Channel c : kChannels) {
      REQUIRE(decoded.keypoints.points[index(c)].has_value());
      CHECK(distance(decoded.keypoints.points[index(c)]->position, pts[index(c)]) <= 0.5 * std::sqrt(2.0) + 1e-12);
    }
  }
}

TEST_CASE("weighted_mse: examples") {
  const std::vector<double> y{1.0, 0.0};
  const std::vector<double> p{0.5, 0.5};
  CHECK(weighted_mse(std::span<const double>(p), std::span<const double>(y), 0.5) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(weighted_mse(std::span<const double>(y), std::span<const double>(y), 0.3) == 0.0);
  CHECK(weighted_mse(std::span<const double>(y), std::span<const double>(y), 0.0) == 0.0);
}

TEST_CASE("weighted_mse: matches the term-by-term oracle and is linear in alpha") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = random_instance(rng, 4, 8, 8);
    const double alpha = ua(rng);
    const double got = weighted_mse(std::span<const double>(in.pred), std::span<const double>(in.label), alpha);
    CHECK(oracle::relative_error(got, oracle::weighted_mse(in.label, in.pred, alpha)) <= 1e-12);

    const double at1 = weighted_mse(std::span<const double>(in.pred), std::span<const double>(in.label), 1.0);
    const double at0 = weighted_mse(std::span<const double>(in.pred), std::span<const double>(in.label), 0.0);
    for (double a : {0.0, 0.25, 0.5, 0.001}) {
      const double l = weighted_mse(std::span<const double>(in.pred), std::span<const double>(in.label), a);
      CHECK(std::abs(l - (a * at1 + (1.0 - a) * at0)) <= 1e-12 * std::max(1.0, l));
    }
  }
}

TEST_CASE("weighted_mse: alpha=1 sees only y=0 pixels, alpha=0 only y=1 pixels") {
  std::mt19937_64 rng(23);
  auto in = random_instance(rng, 4, 6, 6);
  auto loss = [&](const std::vector<double>& p, double a) {
    return weighted_mse(std::span<const double>(p), std::span<const double>(in.label), a);
  };
  auto perturb = [&](double target_label) {
    auto p = in.pred;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (in.label[i] == target_label) p[i] = 1.0 - p[i] * 0.5;
    }
    return p;
  };
  CHECK(loss(perturb(1.0), 1.0) == loss(in.pred, 1.0));
  CHECK(loss(perturb(0.0), 0.0) == loss(in.pred, 0.0));
  CHECK(loss(perturb(0.0), 1.0) != loss(in.pred, 1.0));
  CHECK(loss(perturb(1.0), 0.0) != loss(in.pred, 0.0));
}

TEST_CASE("weighted_mse: zero only at a perfect prediction when 0 < alpha < 1") {
  std::vector<double> y{0, 1, 0, 0};
  std::vector<double> p = y;
  CHECK(weighted_mse(std::span<const double>(p), std::span<const double>(y), 0.001) == 0.0);
  p[2] = 1e-6;
  CHECK(weighted_mse(std::span<const double>(p), std::span<const double>(y), 0.001) > 0.0);
  p = y;
  p[1] = 0.999;
  CHECK(weighted_mse(std::span<const double>(p), std::span<const double>(y), 0.001) > 0.0);
}

TEST_CASE("weighted_mse: shape mismatch and float overload") {
  const std::vector<float> a{0.f, 1.f, 0.f};
  const std::vector<float> b{0.f, 1.f};
  CHECK_THROWS_AS(weighted_mse(std::span<const float>(a), std::span<const float>(b), 0.5), Error);
  CHECK_THROWS_AS(weighted_mse_grad(std::span<const float>(a), std::span<const float>(b), 0.5), Error);
  const std::vector<float> p{0.5f, 0.5f};
  const std::vector<float> y{1.f, 0.f};
  CHECK(weighted_mse(std::span<const float>(p), std::span<const float>(y), 0.5) == doctest::Approx(0.125));
}

TEST_CASE("weighted_mse_grad: closed form and finite differences") {
  SUBCASE("perfect prediction has zero gradient") {
    const std::vector<double> y{0, 1, 0, 1};
    for (double g : weighted_mse_grad(std::span<const double>(y), std::span<const double>(y), 0.3)) CHECK(g == 0.0);
  }
  SUBCASE("background pixel at the production alpha") {
    const std::vector<double> y{0, 0, 1, 0};
    const std::vector<double> p{0.4, 0.0, 1.0, 0.9};
    const auto g = weighted_mse_grad(std::span<const double>(p), std::span<const double>(y), 0.001);
    CHECK(g[0] == doctest::Approx(0.002 * 0.4 / 4.0).epsilon(1e-12));
    CHECK(g[3] == doctest::Approx(0.002 * 0.9 / 4.0).epsilon(1e-12));
  }
  SUBCASE("50 random 4x8x8 instances against central differences") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ua(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const auto in = random_instance(rng, 4, 8, 8);
      const double alpha = trial % 2 == 0 ? 0.001 : ua(rng);
      const auto analytic = weighted_mse_grad(std::span<const double>(in.pred), std::span<const double>(in.label), alpha);
      const auto numeric = oracle::central_difference(
          [&](const std::vector<double>& x) { return oracle::weighted_mse(in.label, x, alpha); }, in.pred, 1e-4);
      for (std::size_t i = 0; i < analytic.size(); ++i) worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("soft_centroid") {
  HeatmapFrame f(Extent{5, 6});
  f.at(Channel::IvsTop, 2, 1) = 1.0f;
  f.at(Channel::IvsTop, 2, 3) = 3.0f;
  f.at(Channel::IvsTop, 4, 0) = -5.0f;  // clamped away
  const auto c = soft_centroid(f.view().channel(Channel::IvsTop), f.extent());
  CHECK(c.x == doctest::Approx(2.5));
  CHECK(c.y == doctest::Approx(2.0));
  CHECK_THROWS_AS(soft_centroid(f.view().channel(Channel::LvSeptal), f.extent()), Error);

  const auto e = soft_centroid(f.view().channel(Channel::IvsTop), f.extent(), CentroidWeighting::Exponential);
  CHECK(e.x > 0.0);
  CHECK(e.x < 5.0);
}

TEST_CASE("augmented_loss") {
  const Calibration cal = Calibration::make(0.1, 50.0);
  const PointQuad truth = line_points();
  const auto label = rasterize(truth, kExtent, JitterConfig{0.0, 0});

  SUBCASE("label as prediction has no auxiliary penalty") {
    const auto l = augmented_loss(label.view(), label.view(), truth, cal, LossConfig{});
    CHECK(l.weighted_mse == 0.0);
    CHECK(l.location_term == 0.0);
    CHECK(l.measurement_term == doctest::Approx(0.0).epsilon(1e-24));
    CHECK(l.total == doctest::Approx(0.0));
  }

  SUBCASE("lambda_aux = 0 reduces to weighted_mse") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    HeatmapFrame pred(kExtent);
    for (auto& v : pred.values()) v = u(rng);
    LossConfig cfg;
    cfg.lambda_aux = 0.0;
    const auto l = augmented_loss(pred.view(), label.view(), truth, cal, cfg);
    CHECK(l.total == weighted_mse(pred.values(), label.values(), cfg.alpha));
  }

  SUBCASE("one point displaced by 3 px") {
    PointQuad moved = truth;
    moved[index(Channel::PwBottom)].y -= 3.0;  // along the line: lvpw 1.0 -> 0.7 cm
    const auto pred = rasterize(moved, kExtent, JitterConfig{0.0, 0});
    LossConfig cfg;
    const auto l = augmented_loss(pred.view(), label.view(), truth, cal, cfg);
    CHECK(l.location_term == doctest::Approx(9.0));
    CHECK(l.measurement_term == doctest::Approx(0.09));
    CHECK(l.total - l.weighted_mse == doctest::Approx(0.001 * (9.0 + 0.09)));
  }

  SUBCASE("empty channel") {
    HeatmapFrame pred = label;
    for (auto& v : pred.channel(Channel::LvSeptal)) v = 0.0f;
    try {
      (void)augmented_loss(pred.view(), label.view(), truth, cal, LossConfig{});
      FAIL("expected EmptyChannel");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyChannel);
      CHECK(e.context().at("channel") == "lv_septal");
    }
  }
}

TEST_CASE("loss config validation") {
  CHECK_THROWS_AS((LossConfig{1.5, 0.001}.validate()), Error);
  CHECK_THROWS_AS((LossConfig{0.5, -1.0}.validate()), Error);
  CHECK_NOTHROW(LossConfig{}.validate());
}
