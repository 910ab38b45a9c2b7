#include "pileup/transform.hpp"

#include <algorithm>
#include <cmath>

#include "pileup/errors.hpp"

namespace pileup {

double estimate_lambda(const CycleSet& cycles) {
  if (cycles.empty())
    throw Error(ErrorCode::EmptyStream, "estimate_lambda: no cycles");
  KahanSum s;
  for (const Cycle& c : cycles.cycles) {
    if (!(c.idle > 0.0))
      throw Error(ErrorCode::Parse, "estimate_lambda: idle durations must be > 0");
    s += c.idle;
  }
  return static_cast<double>(cycles.size()) / s.value();
}

EmpiricalTransform::EmpiricalTransform(const CycleSet& cycles, double c)
    : c_(c), n_(cycles.size()) {
  if (cycles.empty())
    throw Error(ErrorCode::EmptyStream, "EmpiricalTransform: no cycles");
  if (!(c >= 0.0))
    throw Error(ErrorCode::Config, "EmpiricalTransform: c must be >= 0");
  x_.reserve(n_);
  y_.reserve(n_);
  damp_.reserve(n_);
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (const Cycle& cy : cycles.cycles) {
    x_.push_back(cy.duration);
    y_.push_back(cy.energy);
    damp_.push_back(std::exp(-c * cy.duration) * inv_n);
  }
}

cplx EmpiricalTransform::operator()(cplx s, cplx p) const {
  KahanSumC acc;
  for (std::size_t k = 0; k < n_; ++k)
    acc += std::exp(-s * x_[k] - p * y_[k]);
  return acc.value() / static_cast<double>(n_);
}

// Row evaluation: for each panel the phase e^{-i omega X'} advances by a
// constant factor per node, so one complex multiply per (node, cycle)
// suffices. Eight cycles run in interleaved lanes to keep the
// multiply-add chains independent; block order is fixed, so the result
// is deterministic.
void EmpiricalTransform::eval_row(std::span<const OmegaPanel> panels, double nu,
                                  std::span<cplx> out) const {
  std::size_t total = 0;
  for (const auto& p : panels) total += p.count;
  if (out.size() != total)
    throw std::invalid_argument("eval_row: output span has wrong size");

  constexpr std::size_t B = 8;
  std::vector<double> re(total), im(total);

  // nu-dependent per-cycle weight: damp_k * e^{-i nu Y'_k}
  std::vector<double> wr(n_), wi(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    wr[k] = damp_[k] * std::cos(nu * y_[k]);
    wi[k] = -damp_[k] * std::sin(nu * y_[k]);
  }

  std::size_t offset = 0;
  for (const auto& panel : panels) {
    double* out_r = re.data() + offset;
    double* out_i = im.data() + offset;
    for (std::size_t k0 = 0; k0 < n_; k0 += B) {
      const std::size_t lanes = std::min(B, n_ - k0);
      double zr[B], zi[B], qr[B], qi[B];
      for (std::size_t b = 0; b < B; ++b) {
        if (b < lanes) {
          const std::size_t k = k0 + b;
          const double ps = panel.start * x_[k];
          const double pd = panel.step * x_[k];
          const double cs = std::cos(ps), sn = std::sin(ps);
          // z = w_k * e^{-i omega_start X'_k}
          zr[b] = wr[k] * cs + wi[k] * sn;
          zi[b] = wi[k] * cs - wr[k] * sn;
          qr[b] = std::cos(pd);
          qi[b] = -std::sin(pd);
        } else {
          zr[b] = zi[b] = 0.0;
          qr[b] = 1.0;
          qi[b] = 0.0;
        }
      }
      for (std::size_t j = 0; j < panel.count; ++j) {
        double sr = 0.0, si = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
          sr += zr[b];
          si += zi[b];
          const double t = zr[b] * qr[b] - zi[b] * qi[b];
          zi[b] = zr[b] * qi[b] + zi[b] * qr[b];
          zr[b] = t;
        }
        out_r[j] += sr;
        out_i[j] += si;
      }
    }
    offset += panel.count;
  }

  for (std::size_t j = 0; j < total; ++j) out[j] = {re[j], im[j]};
}

namespace {

std::vector<double> symmetric_grid(double W, double step) {
  if (!(W >= 0.0) || !(step > 0.0))
    throw Error(ErrorCode::Config, "diagnostic grid: W >= 0 and step > 0 required");
  std::vector<double> g;
  if (W == 0.0) {
    g.push_back(0.0);
    return g;
  }
  const auto half = static_cast<std::size_t>(std::ceil(W / step));
  g.reserve(2 * half + 1);
  for (std::size_t i = 0; i <= 2 * half; ++i)
    g.push_back(-W + static_cast<double>(i) * W / static_cast<double>(half));
  return g;
}

} // namespace

double delta_diagnostic(const EmpiricalTransform& xf, const LaplaceOracle& oracle,
                        double W, double grid_step) {
  if (!oracle)
    throw Error(ErrorCode::OracleUnavailable, "delta_diagnostic: no oracle");
  const double c = xf.abscissa();
  auto omegas = symmetric_grid(W, grid_step);
  auto nus = symmetric_grid(W, grid_step);
  double worst = 0.0;
  for (double nu : nus)
    for (double omega : omegas) {
      cplx s(c, omega), p(0.0, nu);
      worst = std::max(worst, std::abs(oracle(s, p) - xf(s, p)));
    }
  return worst;
}

double delta_diagnostic(const EmpiricalTransform& xf,
                        const EmpiricalTransform& oracle, double W,
                        double grid_step) {
  if (oracle.abscissa() != xf.abscissa())
    throw Error(ErrorCode::OracleUnavailable,
                "delta_diagnostic: oracle uses a different abscissa c");
  auto omegas = symmetric_grid(W, grid_step);
  auto nus = symmetric_grid(W, grid_step);
  // evaluate both transforms panel-wise along omega for each nu
  OmegaPanel panel{omegas.front(),
                   omegas.size() > 1 ? omegas[1] - omegas[0] : 1.0,
                   omegas.size()};
  std::vector<cplx> row_a(omegas.size()), row_b(omegas.size());
  double worst = 0.0;
  for (double nu : nus) {
    std::fill(row_a.begin(), row_a.end(), cplx{});
    std::fill(row_b.begin(), row_b.end(), cplx{});
    xf.eval_row({&panel, 1}, nu, row_a);
    oracle.eval_row({&panel, 1}, nu, row_b);
    for (std::size_t j = 0; j < omegas.size(); ++j)
      worst = std::max(worst, std::abs(row_a[j] - row_b[j]));
  }
  return worst;
}

double e_diagnostic(const EmpiricalTransform& xf,
                    const EmpiricalTransform& oracle, double W, double x,
                    double lambda_tilde, double grid_step) {
  auto nus = symmetric_grid(W, grid_step);
  auto functional = [&](const EmpiricalTransform& t, double nu) {
    KahanSumC acc;
    auto xs = t.busy_durations();
    auto ys = t.busy_energies();
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k] > x) continue;
      const double amp = std::exp(lambda_tilde * (xs[k] - x));
      acc += cplx{amp * std::cos(nu * ys[k]), -amp * std::sin(nu * ys[k])};
    }
    return acc.value() / static_cast<double>(xs.size());
  };
  double worst = 0.0;
  for (double nu : nus)
    worst = std::max(worst, std::abs(functional(oracle, nu) - functional(xf, nu)));
  return worst;
}

} // namespace pileup
