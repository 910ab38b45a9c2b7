#include "doctest.h"

#include <cmath>

#include "pileup/simulate.hpp"
#include "pileup/transform.hpp"
#include "pileup/validation.hpp"

using namespace pileup;

TEST_CASE("single pulse is one cycle") {
  std::vector<PhotonEvent> ev{{2.0, 3.0, 7.0}};
  CycleSet cs = extract_cycles(ev);
  REQUIRE(cs.size() == 1);
  CHECK(cs.cycles[0].idle == 2.0);
  CHECK(cs.cycles[0].duration == 3.0);
  CHECK(cs.cycles[0].energy == 7.0);
}

TEST_CASE("overlapping pulses merge into one busy period") {
  // second pulse ends at 3 < 4, so the busy period is [1, 4)
  std::vector<PhotonEvent> ev{{1.0, 3.0, 2.0}, {2.0, 1.0, 5.0}};
  CycleSet cs = extract_cycles(ev);
  REQUIRE(cs.size() == 1);
  CHECK(cs.cycles[0].idle == 1.0);
  CHECK(cs.cycles[0].duration == 3.0);
  CHECK(cs.cycles[0].energy == 7.0);
}

TEST_CASE("a later pulse can extend the busy period past its opener") {
  // pattern of the two-pulse cluster: X' = T2 - T1 + X2, Y' = Y1 + Y2
  std::vector<PhotonEvent> ev{{1.0, 3.0, 2.0}, {3.0, 4.0, 5.0}};
  CycleSet cs = extract_cycles(ev);
  REQUIRE(cs.size() == 1);
  CHECK(cs.cycles[0].duration == doctest::Approx(6.0));
  CHECK(cs.cycles[0].energy == 7.0);
}

TEST_CASE("disjoint pulses are separate cycles") {
  std::vector<PhotonEvent> ev{{1.0, 1.0, 2.0}, {5.0, 2.0, 3.0}};
  CycleSet cs = extract_cycles(ev);
  REQUIRE(cs.size() == 2);
  CHECK(cs.cycles[0].idle == 1.0);
  CHECK(cs.cycles[0].duration == 1.0);
  CHECK(cs.cycles[0].energy == 2.0);
  CHECK(cs.cycles[1].idle == 3.0);
  CHECK(cs.cycles[1].duration == 2.0);
  CHECK(cs.cycles[1].energy == 3.0);
}

TEST_CASE("an arrival exactly at the busy end opens a new cycle") {
  std::vector<PhotonEvent> ev{{1.0, 1.0, 2.0}, {2.0, 1.0, 3.0}};
  CycleSet cs = extract_cycles(ev);
  CHECK(cs.size() == 2);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(extract_cycles({}), Error);
  std::vector<PhotonEvent> bad{{1.0, 0.0, 1.0}};
  CHECK_THROWS_AS(extract_cycles(bad), Error);
  std::vector<PhotonEvent> unsorted{{2.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(extract_cycles(unsorted), Error);
}

TEST_CASE("num-cycles stop rule produces exactly n cycles") {
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(100), 7);
  CHECK(cs.size() == 100);
  CHECK(cs.lambda_true == 0.04);
  CHECK(cs.seed == 7);
}

TEST_CASE("same seed reproduces the event stream bit for bit") {
  MarkModel m = MarkModel::bimodal();
  auto a = simulate_photons(0.04, m, StopRule::num_cycles(500), 11);
  auto b = simulate_photons(0.04, m, StopRule::num_cycles(500), 11);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].arrival == b[i].arrival);
    CHECK(a[i].duration == b[i].duration);
    CHECK(a[i].energy == b[i].energy);
  }
}

TEST_CASE("mean inter-arrival time is 1/lambda") {
  MarkModel m = MarkModel::bimodal();
  auto ev = simulate_photons(0.04, m, StopRule::num_cycles(100'000), 13);
  KahanSum gaps, sq;
  double prev = 0.0;
  for (const auto& e : ev) {
    const double g = e.arrival - prev;
    gaps += g;
    sq += g * g;
    prev = e.arrival;
  }
  const double n = static_cast<double>(ev.size());
  const double mean = gaps.value() / n;
  const double se = std::sqrt((sq.value() / n - mean * mean) / n);
  CHECK(std::abs(mean - 25.0) < 3.0 * se);
}

TEST_CASE("fixed-duration stop rule discards the in-progress busy period") {
  MarkModel m = MarkModel::bimodal();
  const double horizon = 50'000.0;
  auto ev = simulate_photons(0.04, m, StopRule::fixed_duration(horizon), 17);
  REQUIRE(!ev.empty());
  double busy_end = 0.0;
  for (const auto& e : ev) {
    CHECK(e.arrival <= horizon);
    busy_end = std::max(busy_end, e.arrival + e.duration);
  }
  CHECK(busy_end <= horizon);
  CycleSet cs = extract_cycles(ev);
  CHECK(cs.size() > 100);
}

TEST_CASE("closed-form busy moments and their small-lambda limits") {
  CHECK(expected_busy_duration(0.04, 20.0) ==
        doctest::Approx((std::exp(0.8) - 1.0) / 0.04).epsilon(1e-14));
  CHECK(expected_busy_energy(0.04, 20.0, 112.0) ==
        doctest::Approx(112.0 * std::exp(0.8)).epsilon(1e-14));
  // lambda -> 0: E[X'] -> E[X]
  CHECK(expected_busy_duration(1e-12, 20.0) == doctest::Approx(20.0).epsilon(1e-10));
}

TEST_CASE("cycle moments meet the closed forms at n = 1e5") {
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(100'000), 19);
  auto rep = cycle_moment_check(cs, 0.04, m.mean_x(), m.mean_y());
  CAPTURE(rep.x_prime.z_score);
  CAPTURE(rep.y_prime.z_score);
  CHECK(std::abs(rep.x_prime.z_score) < 4.0);
  CHECK(std::abs(rep.y_prime.z_score) < 4.0);
}

TEST_CASE("energy is conserved and busy periods are separated") {
  MarkModel m = MarkModel::bimodal();
  auto ev = simulate_photons(0.04, m, StopRule::num_cycles(20'000), 23);
  CycleSet cs = extract_cycles(ev);

  KahanSum photon_energy;
  for (const auto& e : ev) photon_energy += e.energy;
  KahanSum cycle_energy;
  for (const auto& c : cs.cycles) cycle_energy += c.energy;
  CHECK(cycle_energy.value() ==
        doctest::Approx(photon_energy.value()).epsilon(1e-12));

  // T'_k + X'_k < T'_{k+1} with strictly positive idle gaps
  double t = 0.0;
  for (const auto& c : cs.cycles) {
    CHECK(c.idle > 0.0);
    CHECK(c.duration > 0.0);
    CHECK(c.energy > 0.0);
    t += c.idle + c.duration;
  }
}

TEST_CASE("idle durations pass the KS test against Exp(lambda-hat)") {
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(100'000), 29);
  std::vector<double> idles;
  idles.reserve(cs.size());
  for (const auto& c : cs.cycles) idles.push_back(c.idle);
  const double lambda_hat = estimate_lambda(cs);
  const double d = ks_statistic_exponential(idles, lambda_hat);
  const double critical_1pct = 1.6276 / std::sqrt(static_cast<double>(idles.size()));
  CHECK(d < critical_1pct);
}

TEST_CASE("extractor agrees with the on-off rasterization oracle") {
  MarkModel m = MarkModel::bimodal();
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto ev = simulate_photons(0.05, m, StopRule::num_cycles(12),
                               derive_seed(404, seed));
    if (ev.size() > 50) continue;
    CycleSet fast = extract_cycles(ev);
    // 1e-3 of the mean pulse length, refined when an idle gap or busy
    // period is too short for the raster to see it
    double step = 20.0 * 1e-3;
    for (const auto& c : fast.cycles)
      step = std::min({step, c.idle / 4.0, c.duration / 4.0});
    if (step < 1e-6) continue; // raster would not fit in memory
    CycleSet oracle = rasterized_cycles(ev, step);
    REQUIRE(oracle.size() == fast.size());
    for (std::size_t k = 0; k < fast.size(); ++k) {
      CHECK(fast.cycles[k].energy ==
            doctest::Approx(oracle.cycles[k].energy).epsilon(1e-12));
      CHECK(std::abs(fast.cycles[k].duration - oracle.cycles[k].duration) <=
            2.0 * step);
      CHECK(std::abs(fast.cycles[k].idle - oracle.cycles[k].idle) <= 2.0 * step);
    }
    ++checked;
  }
  CHECK(checked > 150);
}
