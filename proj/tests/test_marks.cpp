#include "doctest.h"

#include <cmath>
#include <vector>

#include "pileup/marks.hpp"
#include "pileup/numeric.hpp"

using namespace pileup;

namespace {

// Independent quadrature oracle: plain Simpson over [lo, hi].
template <typename F>
double simpson(F f, double lo, double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return acc * h / 3.0;
}

struct MeanVar {
  double mean, se;
};

template <typename F>
MeanVar mc_mean(F draw, std::size_t n) {
  KahanSum sum, sq;
  for (std::size_t i = 0; i < n; ++i) {
    double v = draw();
    sum += v;
    sq += v * v;
  }
  const double m = sum.value() / static_cast<double>(n);
  const double var = sq.value() / static_cast<double>(n) - m * m;
  return {m, std::sqrt(var / static_cast<double>(n))};
}

} // namespace

TEST_CASE("bimodal model carries the published mixture") {
  MarkModel m = MarkModel::bimodal();
  const auto& mix = m.bimodal_mixture();
  REQUIRE(mix.size() == 2);
  CHECK(mix[0].first == 0.6);
  CHECK(mix[1].first == 0.4);
  CHECK(mix[0].second.mean == 100.0);
  CHECK(mix[0].second.std == 6.0);
  CHECK(mix[1].second.mean == 130.0);
  CHECK(mix[1].second.std == 9.0);
  CHECK(m.bimodal_x().mean == 20.0);
  CHECK(m.bimodal_x().std == 3.0);
  REQUIRE(m.x_max().has_value());
  CHECK(*m.x_max() == 40.0);

  // truncation corrections are invisible at these parameters
  CHECK(m.mean_x() == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(m.mean_y() == doctest::Approx(112.0).epsilon(1e-9));
}

TEST_CASE("bimodal density integrates to one") {
  MarkModel m = MarkModel::bimodal();
  const double mass = simpson([&](double y) { return m.eval_true_density(y); },
                              0.0, 400.0, 200'000);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m.eval_true_density(-5.0) == 0.0);
  CHECK(m.eval_true_density(0.0) == 0.0);
  for (double y : {50.0, 100.0, 115.0, 130.0, 180.0})
    CHECK(m.eval_true_density(y) >= 0.0);
}

TEST_CASE("bimodal sample mean of Y meets the closed-form mean") {
  MarkModel m = MarkModel::bimodal();
  Rng rng(2024);
  auto stat = mc_mean([&] { return m.sample(rng).y; }, 1'000'000);
  CHECK(std::abs(stat.mean - 112.0) < 3.0 * stat.se);
}

TEST_CASE("samplers are bit-deterministic under a fixed seed") {
  MarkModel m = MarkModel::bimodal();
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    Mark ma = m.sample(a);
    Mark mb = m.sample(b);
    CHECK(ma.x == mb.x);
    CHECK(ma.y == mb.y);
  }
}

TEST_CASE("conditional gamma parameters follow the stated formulas") {
  CHECK(MarkModel::cg_shape(0.0) == 2.0);
  CHECK(MarkModel::cg_trunc(0.0) == 4.0);
  CHECK(MarkModel::cg_shape(2048.0) == 4.0);
  CHECK(MarkModel::cg_trunc(2048.0) == 5.0);
}

TEST_CASE("conditional gamma sampler stays within its truncation bound") {
  MarkModel m = MarkModel::conditional_gamma();
  Rng rng(5);
  for (int i = 0; i < 20'000; ++i) {
    Mark mk = m.sample(rng);
    CHECK(mk.x > 0.0);
    CHECK(mk.x <= MarkModel::cg_trunc(mk.y));
    CHECK(mk.y > 0.0);
  }
  REQUIRE(m.x_max().has_value());
  CHECK(*m.x_max() == doctest::Approx(4.0 + 200.0 / 2048.0));
}

TEST_CASE("conditional mean of X given y=1024 matches the quadrature oracle") {
  // oracle: direct Simpson of the truncated Gamma(3, scale 1) moments
  const double shape = MarkModel::cg_shape(1024.0); // 3
  const double trunc = MarkModel::cg_trunc(1024.0); // 4.5
  auto pdf = [&](double t) { return std::pow(t, shape - 1.0) * std::exp(-t); };
  const double mass = simpson(pdf, 0.0, trunc, 20'000);
  const double first = simpson([&](double t) { return t * pdf(t); }, 0.0, trunc,
                               20'000);
  const double oracle = first / mass;

  CHECK(truncated_gamma_mean(shape, trunc) == doctest::Approx(oracle).epsilon(1e-9));

  Rng rng(31);
  auto stat = mc_mean([&] { return sample_truncated_gamma(shape, trunc, rng); },
                      100'000);
  CHECK(std::abs(stat.mean - oracle) < 3.0 * stat.se);
}

TEST_CASE("mg-infinity model has Y identical to X") {
  MarkModel m = MarkModel::mg_infinity_exponential(1.0);
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    Mark mk = m.sample(rng);
    CHECK(mk.y == mk.x);
  }
  auto stat = mc_mean([&] { return m.sample(rng).x; }, 100'000);
  CHECK(std::abs(stat.mean - 1.0) < 3.0 * stat.se);
  CHECK(m.eval_true_density(1.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("monte-carlo means match closed-form means for every builtin") {
  struct Case {
    MarkModel model;
    std::uint64_t seed;
  };
  std::vector<Case> cases;
  cases.push_back({MarkModel::bimodal(), 11});
  cases.push_back({MarkModel::conditional_gamma(), 12});
  cases.push_back({MarkModel::mg_infinity_exponential(1.0), 13});
  for (auto& c : cases) {
    CAPTURE(c.model.description());
    Rng rng(c.seed);
    KahanSum sx, sxx, sy, syy;
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) {
      Mark mk = c.model.sample(rng);
      sx += mk.x;
      sxx += mk.x * mk.x;
      sy += mk.y;
      syy += mk.y * mk.y;
    }
    const double dn = static_cast<double>(n);
    const double mx = sx.value() / dn;
    const double my = sy.value() / dn;
    const double se_x = std::sqrt((sxx.value() / dn - mx * mx) / dn);
    const double se_y = std::sqrt((syy.value() / dn - my * my) / dn);
    CHECK(std::abs(mx - c.model.mean_x()) < 4.0 * se_x);
    CHECK(std::abs(my - c.model.mean_y()) < 4.0 * se_y);
  }
}

TEST_CASE("custom models guard their domain") {
  MarkModel bad = MarkModel::custom([](Rng&) { return Mark{0.0, 0.0}; });
  Rng rng(1);
  CHECK_THROWS_AS(bad.sample(rng), Error);

  MarkModel point = MarkModel::custom([](Rng&) { return Mark{2.0, 3.0}; });
  Mark mk = point.sample(rng);
  CHECK(mk.x == 2.0);
  CHECK(mk.y == 3.0);
  CHECK_THROWS_AS(point.eval_true_density(1.0), Error); // UNAVAILABLE
}

TEST_CASE("tabulated density renormalizes, interpolates and samples") {
  // triangle on [0, 2], deliberately unnormalized
  TabulatedDensity tab({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
  CHECK(tab.pdf(1.0) == doctest::Approx(1.0));
  CHECK(tab.pdf(0.5) == doctest::Approx(0.5));
  CHECK(tab.pdf(2.5) == 0.0);
  CHECK(tab.expectation() == doctest::Approx(1.0));

  Rng rng(3);
  KahanSum s;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    double v = tab.sample(rng);
    CHECK(v > 0.0);
    CHECK(v <= 2.0);
    s += v;
  }
  // Var of the triangle is 1/6
  CHECK(std::abs(s.value() / n - 1.0) < 4.0 * std::sqrt(1.0 / 6.0 / n));

  CHECK_THROWS_AS(TabulatedDensity({1.0, 1.0}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(TabulatedDensity({0.0, 1.0}, {-1.0, 1.0}), Error);
}

TEST_CASE("truncated gaussian closed forms agree with sampling") {
  TruncatedGaussianSpec spec{1.0, 2.0, 0.0, 5.0};
  spec.validate();
  Rng rng(17);
  auto stat = mc_mean([&] { return spec.sample(rng); }, 300'000);
  CHECK(std::abs(stat.mean - spec.expectation()) < 4.0 * stat.se);
  const double mass =
      simpson([&](double v) { return spec.pdf(v); }, 0.0, 5.0, 20'000);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}
