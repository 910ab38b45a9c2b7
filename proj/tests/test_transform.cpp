#include "doctest.h"

#include <cmath>
#include <complex>

#include "pileup/simulate.hpp"
#include "pileup/transform.hpp"

using namespace pileup;

namespace {

CycleSet make_cycles(std::initializer_list<Cycle> cycles) {
  CycleSet cs;
  cs.cycles = cycles;
  return cs;
}

} // namespace

TEST_CASE("lambda estimator is the inverse mean idle time") {
  CycleSet cs = make_cycles({{1.0, 1.0, 1.0}, {2.0, 1.0, 1.0}, {3.0, 1.0, 1.0}});
  CHECK(estimate_lambda(cs) == doctest::Approx(0.5).epsilon(1e-15));

  CycleSet single = make_cycles({{4.0, 1.0, 1.0}});
  CHECK(estimate_lambda(single) == doctest::Approx(0.25).epsilon(1e-15));

  CycleSet empty;
  CHECK_THROWS_AS(estimate_lambda(empty), Error);
}

TEST_CASE("lambda estimator converges at the parametric rate") {
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(100'000), 37);
  const double lambda_hat = estimate_lambda(cs);
  const double se = 0.04 / std::sqrt(100'000.0);
  CHECK(std::abs(lambda_hat - 0.04) < 3.0 * se);
}

TEST_CASE("empirical laplace transform basics") {
  CycleSet one = make_cycles({{1.0, 1.0, 2.0}});
  EmpiricalTransform xf(one, 0.0);
  CHECK(xf({0.0, 0.0}, {0.0, 0.0}) == cplx{1.0, 0.0});
  CHECK(xf({1.0, 0.0}, {0.0, 0.0}).real() ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(2000), 41);
  EmpiricalTransform big(cs, 1e-4);
  CHECK(big({0.0, 0.0}, {0.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-14));
  // modulus bound on the closed right half-planes
  for (double sr : {0.0, 0.1, 1.0})
    for (double si : {-3.0, 0.0, 5.0})
      for (double pr : {0.0, 0.05})
        for (double pi : {-1.0, 0.2}) {
          CHECK(std::abs(big({sr, si}, {pr, pi})) <= 1.0 + 1e-12);
        }
}

TEST_CASE("transform is Hermitian in (s, p)") {
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(500), 43);
  EmpiricalTransform xf(cs, 1e-4);
  for (double om : {0.3, 2.0})
    for (double nu : {0.0, 0.7}) {
      cplx s{1e-4, om}, p{0.0, nu};
      cplx direct = xf(std::conj(s), std::conj(p));
      cplx mirrored = std::conj(xf(s, p));
      CHECK(direct.real() == mirrored.real());
      CHECK(direct.imag() == mirrored.imag());
    }
}

TEST_CASE("panel row evaluation equals pointwise evaluation") {
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(3000), 47);
  EmpiricalTransform xf(cs, 1e-4);

  std::vector<OmegaPanel> panels{{-1.0, 0.125, 17}, {2.0, 0.25, 5}};
  std::vector<cplx> row(22);
  const double nu = 0.37;
  xf.eval_row(panels, nu, row);

  std::size_t idx = 0;
  for (const auto& p : panels)
    for (std::size_t j = 0; j < p.count; ++j, ++idx) {
      const double omega = p.start + p.step * static_cast<double>(j);
      const cplx ref = xf({1e-4, omega}, {0.0, nu});
      CHECK(std::abs(row[idx] - ref) < 1e-12);
    }
}

TEST_CASE("delta diagnostic is zero on self-comparison") {
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(2000), 53);
  EmpiricalTransform xf(cs, 1e-4);
  CHECK(delta_diagnostic(xf, xf, 2.0, 2.0 / 32.0) == 0.0);
  // the W = 0 grid is the single point (c, 0)
  CHECK(delta_diagnostic(xf, make_oracle(xf), 0.0, 1.0) == 0.0);
}

TEST_CASE("delta diagnostic shrinks with the sample size") {
  MarkModel m = MarkModel::bimodal();
  CycleSet ref = simulate_cycles(0.04, m, StopRule::num_cycles(200'000), 59);
  EmpiricalTransform oracle(ref, 1e-4);

  auto median_delta = [&](std::size_t n, std::uint64_t base) {
    std::vector<double> vals;
    for (std::uint64_t r = 0; r < 9; ++r) {
      CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(n),
                                    derive_seed(base, r));
      EmpiricalTransform xf(cs, 1e-4);
      vals.push_back(delta_diagnostic(xf, oracle, 2.0, 2.0 / 32.0));
    }
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
  };
  const double d_small = median_delta(1000, 61);
  const double d_large = median_delta(10'000, 67);
  CHECK(d_large < d_small);
}

TEST_CASE("e diagnostic collapses to the ecf sup-error when lambda~ = 0") {
  MarkModel m = MarkModel::bimodal();
  CycleSet a = simulate_cycles(0.04, m, StopRule::num_cycles(3000), 71);
  CycleSet b = simulate_cycles(0.04, m, StopRule::num_cycles(50'000), 73);
  EmpiricalTransform xa(a, 1e-4), xb(b, 1e-4);

  double xmax = 0.0;
  for (const auto& c : a.cycles) xmax = std::max(xmax, c.duration);
  for (const auto& c : b.cycles) xmax = std::max(xmax, c.duration);

  const double W = 0.5, step = 0.5 / 16.0;
  const double e_val = e_diagnostic(xa, xb, W, xmax + 1.0, 0.0, step);

  // manual sup over the same grid of |ecf_b - ecf_a|
  double manual = 0.0;
  for (int i = -16; i <= 16; ++i) {
    const double nu = step * i;
    auto ecf = [&](const CycleSet& cs) {
      KahanSumC acc;
      for (const auto& c : cs.cycles)
        acc += cplx{std::cos(nu * c.energy), -std::sin(nu * c.energy)};
      return acc.value() / static_cast<double>(cs.size());
    };
    manual = std::max(manual, std::abs(ecf(b) - ecf(a)));
  }
  CHECK(e_val == doctest::Approx(manual).epsilon(1e-12));

  // self comparison vanishes
  CHECK(e_diagnostic(xa, xa, W, xmax + 1.0, 0.04, step) == 0.0);
}

TEST_CASE("e diagnostic decreases in n") {
  MarkModel m = MarkModel::bimodal();
  CycleSet ref = simulate_cycles(0.04, m, StopRule::num_cycles(200'000), 79);
  EmpiricalTransform oracle(ref, 1e-4);

  auto median_e = [&](std::size_t n, std::uint64_t base) {
    std::vector<double> vals;
    for (std::uint64_t r = 0; r < 9; ++r) {
      CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(n),
                                    derive_seed(base, r));
      EmpiricalTransform xf(cs, 1e-4);
      vals.push_back(e_diagnostic(xf, oracle, 0.5, 60.0, 0.04, 0.5 / 32.0));
    }
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
  };
  CHECK(median_e(10'000, 83) < median_e(1000, 89));
}
