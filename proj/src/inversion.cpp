#include "pileup/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pileup/errors.hpp"
#include "pileup/parallel.hpp"

namespace pileup {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

double Kernel::fourier(double nu) const {
  const double a = std::abs(nu);
  if (a > 1.0) return 0.0;
  switch (kind) {
    case Kind::Sinc:
      return 1.0;
    case Kind::FlatTopTrapezoid:
      if (a <= flat) return 1.0;
      return (1.0 - a) / (1.0 - flat);
  }
  return 0.0;
}

double Kernel::spatial(double u) const {
  switch (kind) {
    case Kind::Sinc:
      if (std::abs(u) < 1e-8) return (1.0 - u * u / 6.0) / pi;
      return std::sin(u) / (pi * u);
    case Kind::FlatTopTrapezoid: {
      const double a = flat;
      if (std::abs(u) < 1e-6) return (1.0 + a) / (2.0 * pi);
      return (std::cos(a * u) - std::cos(u)) / (pi * (1.0 - a) * u * u);
    }
  }
  return 0.0;
}

double Kernel::l2_norm_sq() const {
  switch (kind) {
    case Kind::Sinc:
      return 1.0 / pi;
    case Kind::FlatTopTrapezoid:
      return (1.0 + 2.0 * flat) / (3.0 * pi);
  }
  return 0.0;
}

std::string Kernel::name() const {
  switch (kind) {
    case Kind::Sinc:
      return "sinc";
    case Kind::FlatTopTrapezoid:
      return "trapezoid(" + std::to_string(flat) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// EstimatorConfig
// ---------------------------------------------------------------------------

void EstimatorConfig::validate() const {
  if (!(c > 0.0)) throw Error(ErrorCode::Config, "config: c must be > 0");
  if (!(x_trunc > 0.0))
    throw Error(ErrorCode::Config, "config: x_trunc must be > 0");
  if (!(h > 0.0)) throw Error(ErrorCode::Config, "config: h must be > 0");
  if (omega_max < 0.0)
    throw Error(ErrorCode::Config, "config: omega_max must be >= 0");
  if (!(y_max > y_min))
    throw Error(ErrorCode::Config, "config: y_max must exceed y_min");
  if (y_count < 2) throw Error(ErrorCode::Config, "config: y_count must be >= 2");
  if (denominator_floor < 0.0)
    throw Error(ErrorCode::Config, "config: denominator_floor must be >= 0");
  if (!(nu_oversample >= 1.0))
    throw Error(ErrorCode::Config, "config: nu_oversample must be >= 1");
  if (kernel.kind == Kernel::Kind::FlatTopTrapezoid &&
      !(kernel.flat > 0.0 && kernel.flat < 1.0))
    throw Error(ErrorCode::Config, "config: trapezoid flat width must be in (0,1)");
}

double EstimatorConfig::resolved_omega_max(double lambda_hat) const {
  if (omega_max > 0.0) return omega_max;
  return std::max(200.0, 40.0 / (c + lambda_hat));
}

std::size_t EstimatorConfig::resolved_omega_points(double omega,
                                                   double x) const {
  const double required = 8.0 * omega * x / pi;
  auto minimum = static_cast<std::size_t>(std::ceil(required));
  minimum = std::max<std::size_t>(minimum, 129);
  minimum |= 1; // odd node count, even interval count
  if (omega_points == 0) return minimum;
  if (static_cast<double>(omega_points) < required)
    throw Error(ErrorCode::Resolution,
                "omega_points=" + std::to_string(omega_points) +
                    " cannot resolve exp(i omega x): need >= " +
                    std::to_string(minimum));
  return omega_points | 1;
}

double EstimatorConfig::resolved_floor(double lambda_hat) const {
  if (denominator_floor > 0.0) return denominator_floor;
  return 0.05 * (c + lambda_hat) *
         std::exp(-(c + 2.0 * lambda_hat) * x_trunc);
}

// ---------------------------------------------------------------------------
// Bromwich panels
// ---------------------------------------------------------------------------

namespace {

void append_panel(std::vector<OmegaPanel>& panels, double lo, double hi,
                  double max_step) {
  auto intervals = static_cast<std::size_t>(std::ceil((hi - lo) / max_step));
  intervals += intervals % 2; // even for Simpson
  intervals = std::max<std::size_t>(intervals, 2);
  panels.push_back({lo, (hi - lo) / static_cast<double>(intervals),
                    intervals + 1});
}

} // namespace

std::vector<OmegaPanel> make_bromwich_panels(double c, double omega_max,
                                             std::size_t omega_points) {
  if (!(omega_max > 0.0) || omega_points < 3)
    throw Error(ErrorCode::Config, "bromwich panels: bad omega grid");
  const double base_step =
      2.0 * omega_max / static_cast<double>(omega_points - 1);

  // Positive half first; mirrored below.
  std::vector<OmegaPanel> pos;
  double cursor = 0.0;
  if (base_step > 0.5 * c) {
    // The integrands peak on a width-c scale around omega = 0; refine
    // geometrically until the base step is adequate.
    const double zoom_end =
        std::min(std::max(1000.0 * c, 0.05), 0.25 * omega_max);
    double hi = std::min(16.0 * c, zoom_end);
    append_panel(pos, 0.0, hi, std::min(c / 4.0, base_step));
    cursor = hi;
    while (cursor < zoom_end) {
      hi = std::min(4.0 * cursor, zoom_end);
      append_panel(pos, cursor, hi, std::min(cursor / 8.0, base_step));
      cursor = hi;
    }
  }
  append_panel(pos, cursor, omega_max, base_step);

  std::vector<OmegaPanel> panels;
  panels.reserve(2 * pos.size());
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
    const double hi = it->start + it->step * static_cast<double>(it->count - 1);
    panels.push_back({-hi, it->step, it->count});
  }
  panels.insert(panels.end(), pos.begin(), pos.end());
  return panels;
}

std::size_t panel_node_count(std::span<const OmegaPanel> panels) {
  std::size_t total = 0;
  for (const auto& p : panels) total += p.count;
  return total;
}

std::vector<double> panel_weights(std::span<const OmegaPanel> panels) {
  std::vector<double> w;
  w.reserve(panel_node_count(panels));
  for (const auto& p : panels) {
    const double f = p.step / 3.0;
    for (std::size_t j = 0; j < p.count; ++j) {
      double coeff = (j == 0 || j + 1 == p.count) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      w.push_back(f * coeff);
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Generic Simpson quadrature
// ---------------------------------------------------------------------------

QuadratureResult quadrature(const std::function<cplx(double)>& f,
                            double omega_max, std::size_t omega_points,
                            int decay_order, double osc_scale) {
  if (!(omega_max > 0.0) || omega_points < 3)
    throw Error(ErrorCode::Config, "quadrature: bad grid");
  if (decay_order != 2 && decay_order != 3)
    throw Error(ErrorCode::Config, "quadrature: decay_order must be 2 or 3");
  if (osc_scale > 0.0) {
    const double required = 8.0 * omega_max * osc_scale / pi;
    if (static_cast<double>(omega_points) < required)
      throw Error(ErrorCode::Resolution,
                  "quadrature: omega_points too small for the oscillation "
                  "scale (need >= " +
                      std::to_string(static_cast<std::size_t>(required)) + ")");
  }
  const std::size_t nodes = omega_points | 1;
  const double step = 2.0 * omega_max / static_cast<double>(nodes - 1);

  KahanSumC acc;
  double tail_coeff = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double omega = -omega_max + step * static_cast<double>(j);
    const cplx v = f(omega);
    const double coeff = (j == 0 || j + 1 == nodes) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += v * (coeff * step / 3.0);
    const double a = std::abs(omega);
    if (a >= 0.1 * omega_max)
      tail_coeff = std::max(tail_coeff,
                            std::abs(v) * std::pow(a, double(decay_order)));
  }
  return {acc.value(),
          tail_coeff * std::pow(omega_max, 1.0 - double(decay_order))};
}

// ---------------------------------------------------------------------------
// Estimator internals
// ---------------------------------------------------------------------------

namespace {

constexpr double kExpCap = 700.0;

struct InversionPlan {
  double lambda_hat = 0.0;
  double x = 0.0;
  double c = 0.0;
  double omega = 0.0;  // resolved omega_max
  double floor = 0.0;
  std::vector<OmegaPanel> panels;
  std::vector<double> node_omega;
  std::vector<double> weight;
  std::vector<cplx> osc;        // e^{i omega_j x}
  std::vector<double> amp_i1;   // 1(X'_k <= x) e^{lambda X'_k}
  std::vector<double> amp_a1;   // (x - X'_k)+ e^{lambda X'_k}
  double prefactor = 0.0;       // e^{(c + lambda) x}
};

struct NuResult {
  cplx i1, i2, a;
  double min_denominator = 0.0;
  double i2_tail = 0.0;
  double a2_tail = 0.0;
};

InversionPlan make_plan(const EmpiricalTransform& xf, double lambda_hat,
                        double x, const EstimatorConfig& cfg) {
  if (!(lambda_hat > 0.0))
    throw Error(ErrorCode::Config, "inversion: lambda_hat must be > 0");
  InversionPlan plan;
  plan.lambda_hat = lambda_hat;
  plan.x = x;
  plan.c = cfg.c;
  plan.omega = cfg.resolved_omega_max(lambda_hat);
  plan.floor = cfg.resolved_floor(lambda_hat);
  plan.panels = make_bromwich_panels(
      cfg.c, plan.omega, cfg.resolved_omega_points(plan.omega, x));
  plan.weight = panel_weights(plan.panels);

  plan.node_omega.reserve(plan.weight.size());
  for (const auto& p : plan.panels)
    for (std::size_t j = 0; j < p.count; ++j)
      plan.node_omega.push_back(p.start + p.step * static_cast<double>(j));

  plan.osc.reserve(plan.node_omega.size());
  for (double w : plan.node_omega)
    plan.osc.emplace_back(std::cos(w * x), std::sin(w * x));

  if ((cfg.c + lambda_hat) * x > kExpCap)
    throw Error(ErrorCode::Overflow,
                "inversion: exp((c + lambda) x) exceeds the exponent cap");
  plan.prefactor = std::exp((cfg.c + lambda_hat) * x);

  auto xs = xf.busy_durations();
  plan.amp_i1.resize(xs.size());
  plan.amp_a1.resize(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (xs[k] <= x) {
      const double e = lambda_hat * xs[k];
      if (e > kExpCap)
        throw Error(ErrorCode::Overflow,
                    "inversion: exp(lambda_hat X') exceeds the exponent cap "
                    "(outlier busy duration)");
      const double amp = std::exp(e);
      plan.amp_i1[k] = amp;
      plan.amp_a1[k] = (x - xs[k]) * amp;
    } else {
      plan.amp_i1[k] = 0.0;
      plan.amp_a1[k] = 0.0;
    }
  }
  return plan;
}

/// All per-nu quantities in one pass over the omega lattice.
NuResult eval_nu(const EmpiricalTransform& xf, const InversionPlan& plan,
                 double nu, std::vector<cplx>& row_scratch) {
  NuResult r;
  const std::size_t m = plan.node_omega.size();
  row_scratch.assign(m, cplx{});
  xf.eval_row(plan.panels, nu, row_scratch);

  const double lambda = plan.lambda_hat;
  const cplx shift(plan.c + lambda, 0.0);
  KahanSumC s_i2, s_a2;
  double min_denom = std::numeric_limits<double>::infinity();
  double tail_i2 = 0.0, tail_a2 = 0.0;
  const double decade = 0.1 * plan.omega;

  for (std::size_t j = 0; j < m; ++j) {
    const cplx L = row_scratch[j];
    const cplx W = shift + cplx(0.0, plan.node_omega[j]);
    const cplx D = W - lambda * L;
    min_denom = std::min(min_denom, std::abs(D));
    const cplx L2 = L * L;
    const cplx fi2 = L2 / W * plan.osc[j] / D;
    const cplx la2 = lambda * L2;
    const cplx fa2 = lambda * la2 / (W * W) * plan.osc[j] / D;
    s_i2 += plan.weight[j] * fi2;
    s_a2 += plan.weight[j] * fa2;
    const double aw = std::abs(plan.node_omega[j]);
    if (aw >= decade) {
      const double w3 = aw * aw * aw;
      tail_i2 = std::max(tail_i2, std::abs(fi2) * w3);
      tail_a2 = std::max(tail_a2, std::abs(fa2) * w3);
    }
  }

  // Closed-form halves: I1 and the a1 part of a-hat.
  auto ys = xf.busy_energies();
  KahanSumC acc_i1, acc_a1;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (plan.amp_i1[k] == 0.0 && plan.amp_a1[k] == 0.0) continue;
    const double cs = std::cos(nu * ys[k]);
    const double sn = -std::sin(nu * ys[k]);
    acc_i1 += cplx(plan.amp_i1[k] * cs, plan.amp_i1[k] * sn);
    acc_a1 += cplx(plan.amp_a1[k] * cs, plan.amp_a1[k] * sn);
  }
  const double inv_n = 1.0 / static_cast<double>(xf.size());
  const cplx i1 = acc_i1.value() * inv_n;
  const cplx a1 = acc_a1.value() * inv_n;

  const double norm = plan.prefactor / (2.0 * pi);
  r.i1 = i1;
  r.i2 = lambda * norm * s_i2.value();
  r.a = 1.0 + lambda * a1 + norm * s_a2.value();
  r.min_denominator = min_denom;
  const double inv_om2 = 1.0 / (plan.omega * plan.omega);
  r.i2_tail = lambda * norm * tail_i2 * inv_om2;
  r.a2_tail = norm * tail_a2 * inv_om2;
  return r;
}

void check_floor(const NuResult& r, const InversionPlan& plan, double nu) {
  if (r.min_denominator < plan.floor)
    throw Error(ErrorCode::DenominatorFloor,
                "inversion: |c + i omega + lambda - lambda L| = " +
                    std::to_string(r.min_denominator) + " < floor " +
                    std::to_string(plan.floor) + " at nu = " +
                    std::to_string(nu));
}

} // namespace

cplx a_hat(const EmpiricalTransform& xf, double lambda_hat, double x, double nu,
           const EstimatorConfig& cfg) {
  cfg.validate();
  InversionPlan plan = make_plan(xf, lambda_hat, x, cfg);
  std::vector<cplx> scratch;
  NuResult r = eval_nu(xf, plan, nu, scratch);
  check_floor(r, plan, nu);
  return r.a;
}

cplx i1_hat(const CycleSet& cycles, double lambda_hat, double x, double nu) {
  if (cycles.empty())
    throw Error(ErrorCode::EmptyStream, "i1_hat: no cycles");
  KahanSumC acc;
  for (const Cycle& c : cycles.cycles) {
    if (c.duration > x) continue;
    const double e = lambda_hat * c.duration;
    if (e > kExpCap)
      throw Error(ErrorCode::Overflow, "i1_hat: exponent cap exceeded");
    const double amp = std::exp(e);
    acc += cplx(amp * std::cos(nu * c.energy), -amp * std::sin(nu * c.energy));
  }
  return acc.value() / static_cast<double>(cycles.size());
}

cplx i2_hat(const EmpiricalTransform& xf, double lambda_hat, double x, double nu,
            const EstimatorConfig& cfg) {
  cfg.validate();
  InversionPlan plan = make_plan(xf, lambda_hat, x, cfg);
  std::vector<cplx> scratch;
  NuResult r = eval_nu(xf, plan, nu, scratch);
  check_floor(r, plan, nu);
  return r.i2;
}

// ---------------------------------------------------------------------------
// estimate_density
// ---------------------------------------------------------------------------

DensityEstimate estimate_density_with(const EmpiricalTransform& xf,
                                      double lambda_hat, std::size_t n_cycles,
                                      const EstimatorConfig& cfg) {
  cfg.validate();
  InversionPlan plan = make_plan(xf, lambda_hat, cfg.x_trunc, cfg);

  // Symmetric nu grid over the kernel support [-1/h, 1/h]; only nu >= 0
  // is evaluated, the rest follows from Hermitian symmetry.
  const double w_nu = 1.0 / cfg.h;
  const double span = std::max(std::abs(cfg.y_max), std::abs(cfg.y_min));
  const double target_step = pi / (2.0 * span) / cfg.nu_oversample;
  auto half = static_cast<std::size_t>(std::ceil(w_nu / target_step));
  half += half % 2; // even half-count keeps the Simpson pattern symmetric
  half = std::max<std::size_t>(half, 2);
  const double dnu = w_nu / static_cast<double>(half);

  std::vector<NuResult> results(half + 1);
  const int threads = resolve_threads(cfg.threads);
  parallel_for(half + 1, threads, [&](std::size_t m) {
    thread_local std::vector<cplx> scratch;
    results[m] = eval_nu(xf, plan, dnu * static_cast<double>(m), scratch);
  });

  DensityEstimate est;
  est.config = cfg;
  est.lambda_hat = lambda_hat;
  est.n_cycles = n_cycles;
  est.denominator_floor = plan.floor;
  est.min_denominator = std::numeric_limits<double>::infinity();

  std::vector<cplx> g(half + 1);
  for (std::size_t m = 0; m <= half; ++m) {
    const double nu = dnu * static_cast<double>(m);
    const NuResult& r = results[m];
    check_floor(r, plan, nu);
    g[m] = (r.i1 + r.i2) / r.a;
    if (!std::isfinite(g[m].real()) || !std::isfinite(g[m].imag()))
      throw Error(ErrorCode::NanDetected,
                  "inversion: non-finite integrand at nu = " + std::to_string(nu));
    est.min_denominator = std::min(est.min_denominator, r.min_denominator);
    est.i2_tail_bound = std::max(est.i2_tail_bound, r.i2_tail);
    est.a2_tail_bound = std::max(est.a2_tail_bound, r.a2_tail);
  }

  // Simpson weights on the full symmetric grid, folded onto m >= 0.
  std::vector<double> wnu(half + 1);
  for (std::size_t m = 0; m <= half; ++m) {
    double coeff = (m == half) ? 1.0 : (m % 2 ? 4.0 : 2.0);
    wnu[m] = coeff * dnu / 3.0;
  }

  std::vector<double> kstar(half + 1);
  for (std::size_t m = 0; m <= half; ++m)
    kstar[m] = cfg.kernel.fourier(cfg.h * dnu * static_cast<double>(m));

  est.y.resize(cfg.y_count);
  est.m_hat.resize(cfg.y_count);
  const double dy = (cfg.y_max - cfg.y_min) / static_cast<double>(cfg.y_count - 1);
  parallel_for(cfg.y_count, threads, [&](std::size_t i) {
    const double y = cfg.y_min + dy * static_cast<double>(i);
    double acc = 0.5 * wnu[0] * kstar[0] * g[0].real();
    for (std::size_t m = 1; m <= half; ++m) {
      if (kstar[m] == 0.0) continue;
      const double phase = dnu * static_cast<double>(m) * y;
      const cplx e(std::cos(phase), std::sin(phase));
      acc += wnu[m] * kstar[m] * (g[m] * e).real();
    }
    est.y[i] = y;
    est.m_hat[i] = acc / pi;
  });

  if (cfg.project_density) project_density(est);
  return est;
}

DensityEstimate estimate_density(const CycleSet& cycles,
                                 const EstimatorConfig& cfg) {
  cfg.validate();
  if (cycles.empty())
    throw Error(ErrorCode::EmptyStream, "estimate_density: no cycles");
  const double lambda_hat = estimate_lambda(cycles);
  EmpiricalTransform xf(cycles, cfg.c);
  return estimate_density_with(xf, lambda_hat, cycles.size(), cfg);
}

double integrate_estimate(const DensityEstimate& est) {
  KahanSum s;
  for (std::size_t i = 0; i + 1 < est.y.size(); ++i)
    s += 0.5 * (est.m_hat[i] + est.m_hat[i + 1]) * (est.y[i + 1] - est.y[i]);
  return s.value();
}

void project_density(DensityEstimate& est) {
  for (double& v : est.m_hat) v = std::max(v, 0.0);
  const double mass = integrate_estimate(est);
  if (!(mass > 0.0))
    throw Error(ErrorCode::NanDetected, "project_density: no positive mass");
  for (double& v : est.m_hat) v /= mass;
}

} // namespace pileup
