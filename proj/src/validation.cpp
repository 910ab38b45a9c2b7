#include "pileup/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pileup/parallel.hpp"

namespace pileup {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// direct evaluation of a(u, p) and the Theorem-1 identity
// ---------------------------------------------------------------------------

DirectAResult direct_a(const MarkModel& model, double lambda, double x, cplx p,
                       std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw Error(ErrorCode::Config, "direct_a: n_mc must be >= 2");
  Rng rng(seed);
  KahanSumC acc;
  KahanSum acc_sq;
  for (std::size_t i = 0; i < n_mc; ++i) {
    Mark mk = model.sample(rng);
    const double plus = std::max(x - mk.x, 0.0);
    const cplx term = std::exp(-p * mk.y) * plus;
    acc += term;
    acc_sq += std::norm(term);
  }
  const double n = static_cast<double>(n_mc);
  const cplx inner = acc.value() / n;
  const double var = std::max(acc_sq.value() / n - std::norm(inner), 0.0);
  const cplx a = std::exp(lambda * inner);
  return {a, std::abs(a) * lambda * std::sqrt(var / n)};
}

namespace {

struct SortedMarks {
  std::vector<double> x;
  std::vector<cplx> eny; // e^{-p Y}, ordered like x
};

SortedMarks draw_sorted_marks(const MarkModel& model, cplx p, std::size_t n_mc,
                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, cplx>> rows;
  rows.reserve(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    Mark mk = model.sample(rng);
    rows.emplace_back(mk.x, std::exp(-p * mk.y));
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SortedMarks out;
  out.x.reserve(n_mc);
  out.eny.reserve(n_mc);
  for (auto& [x, e] : rows) {
    out.x.push_back(x);
    out.eny.push_back(e);
  }
  return out;
}

// int_0^umax e^{-(s+lambda)u} (e^{lambda inner(u)} - 1) du with
// inner(u) = mean(e^{-pY}(u - X)+), by Simpson over u. Prefix sums over
// the X-sorted draws make inner(u) O(1) per grid point.
cplx lhs_integral(const SortedMarks& marks, double lambda, cplx s,
                  double u_step, double u_max) {
  const std::size_t n = marks.x.size();
  std::vector<cplx> pre_e(n + 1), pre_xe(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    pre_e[i + 1] = pre_e[i] + marks.eny[i];
    pre_xe[i + 1] = pre_xe[i] + marks.eny[i] * marks.x[i];
  }
  auto intervals = static_cast<std::size_t>(std::ceil(u_max / u_step));
  intervals += intervals % 2;
  intervals = std::max<std::size_t>(intervals, 2);
  const double du = u_max / static_cast<double>(intervals);

  KahanSumC acc;
  std::size_t idx = 0;
  for (std::size_t j = 0; j <= intervals; ++j) {
    const double u = du * static_cast<double>(j);
    while (idx < n && marks.x[idx] <= u) ++idx;
    const cplx inner =
        (static_cast<double>(u) * pre_e[idx] - pre_xe[idx]) /
        static_cast<double>(n);
    const cplx f = std::exp(-(s + lambda) * u) *
                   (std::exp(lambda * inner) - 1.0);
    const double coeff =
        (j == 0 || j == intervals) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += f * (coeff * du / 3.0);
  }
  return acc.value();
}

cplx rhs_value(cplx laplace, double lambda, cplx s) {
  return lambda * laplace / (s + lambda) / (s + lambda - lambda * laplace);
}

} // namespace

Theorem1Report theorem1_check(const MarkModel& model, double lambda, cplx s,
                              cplx p, std::size_t n_cycles, std::size_t n_mc,
                              std::uint64_t seed) {
  if (!(s.real() > 0.0))
    throw Error(ErrorCode::Config, "theorem1_check: Re(s) must be > 0");
  const double x_scale = model.x_max().value_or(10.0 * model.mean_x());
  const double u_step = x_scale / 200.0;
  const double u_max = 23.03 / (s.real() + lambda); // e^{-(s+lambda)u} < 1e-10

  // LHS pipeline: fresh mark draws.
  SortedMarks marks = draw_sorted_marks(model, p, n_mc, derive_seed(seed, 1));
  const cplx lhs = lhs_integral(marks, lambda, s, u_step, u_max);

  // RHS pipeline: simulated cycles.
  CycleSet cycles = simulate_cycles(lambda, model, StopRule::num_cycles(n_cycles),
                                    derive_seed(seed, 2));
  EmpiricalTransform xf(cycles, 0.0);
  const cplx rhs = rhs_value(xf(s, p), lambda, s);

  // Error budgets from 10-way batching of each pipeline.
  constexpr std::size_t kBatches = 10;
  std::vector<cplx> lhs_b, rhs_b;
  for (std::size_t b = 0; b < kBatches; ++b) {
    SortedMarks part;
    for (std::size_t i = b; i < marks.x.size(); i += kBatches) {
      part.x.push_back(marks.x[i]);
      part.eny.push_back(marks.eny[i]);
    }
    lhs_b.push_back(lhs_integral(part, lambda, s, u_step, u_max));

    CycleSet slice;
    for (std::size_t i = b; i < cycles.size(); i += kBatches)
      slice.cycles.push_back(cycles.cycles[i]);
    EmpiricalTransform xb(slice, 0.0);
    rhs_b.push_back(rhs_value(xb(s, p), lambda, s));
  }
  auto batch_se = [](std::span<const cplx> vs) {
    cplx mean{};
    for (cplx v : vs) mean += v;
    mean /= static_cast<double>(vs.size());
    double var = 0.0;
    for (cplx v : vs) var += std::norm(v - mean);
    var /= static_cast<double>(vs.size() - 1);
    return std::sqrt(var / static_cast<double>(vs.size()));
  };

  Theorem1Report rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.lhs_std_error = batch_se(lhs_b);
  rep.rhs_std_error = batch_se(rhs_b);
  rep.abs_discrepancy = std::abs(lhs - rhs);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  rep.rel_discrepancy = rep.abs_discrepancy / scale;
  return rep;
}

// ---------------------------------------------------------------------------
// reference curves
// ---------------------------------------------------------------------------

DensityEstimate reference_kde(std::span<const double> samples, double h,
                              const Kernel& kernel, double y_min, double y_max,
                              std::size_t y_count) {
  if (samples.empty())
    throw Error(ErrorCode::EmptyStream, "reference_kde: no samples");
  DensityEstimate est;
  est.lambda_hat = 0.0;
  est.n_cycles = samples.size();
  est.config.h = h;
  est.config.kernel = kernel;
  est.config.y_min = y_min;
  est.config.y_max = y_max;
  est.config.y_count = y_count;
  est.y.resize(y_count);
  est.m_hat.resize(y_count);
  const double dy = (y_max - y_min) / static_cast<double>(y_count - 1);
  const double inv = 1.0 / (static_cast<double>(samples.size()) * h);
  for (std::size_t i = 0; i < y_count; ++i) {
    const double y = y_min + dy * static_cast<double>(i);
    KahanSum acc;
    for (double s : samples) acc += kernel.spatial((y - s) / h);
    est.y[i] = y;
    est.m_hat[i] = acc.value() * inv;
  }
  return est;
}

std::vector<double> smoothed_true_density(const MarkModel& model,
                                          const EstimatorConfig& cfg) {
  // Fourier route: m*(nu) by trapezoid over a fine energy grid, then the
  // same nu synthesis the estimator uses, so quadrature conventions
  // cancel in comparisons.
  const double w_nu = 1.0 / cfg.h;
  const double span = std::max(std::abs(cfg.y_max), std::abs(cfg.y_min));
  const double target_step = pi / (2.0 * span) / cfg.nu_oversample;
  auto half = static_cast<std::size_t>(std::ceil(w_nu / target_step));
  half += half % 2;
  half = std::max<std::size_t>(half, 2);
  const double dnu = w_nu / static_cast<double>(half);

  const double t_hi = std::max(1.5 * cfg.y_max, 300.0);
  constexpr std::size_t kT = 1 << 15;
  const double dt = t_hi / static_cast<double>(kT);
  std::vector<double> dens(kT + 1);
  for (std::size_t j = 0; j <= kT; ++j)
    dens[j] = model.eval_true_density(dt * static_cast<double>(j));

  std::vector<cplx> mstar(half + 1);
  for (std::size_t m = 0; m <= half; ++m) {
    const double nu = dnu * static_cast<double>(m);
    KahanSumC acc;
    for (std::size_t j = 0; j <= kT; ++j) {
      const double t = dt * static_cast<double>(j);
      const double w = (j == 0 || j == kT) ? 0.5 : 1.0;
      acc += cplx(std::cos(nu * t), -std::sin(nu * t)) * (dens[j] * w);
    }
    mstar[m] = acc.value() * dt;
  }

  std::vector<double> wnu(half + 1), kstar(half + 1);
  for (std::size_t m = 0; m <= half; ++m) {
    wnu[m] = ((m == half) ? 1.0 : (m % 2 ? 4.0 : 2.0)) * dnu / 3.0;
    kstar[m] = cfg.kernel.fourier(cfg.h * dnu * static_cast<double>(m));
  }

  std::vector<double> out(cfg.y_count);
  const double dy = (cfg.y_max - cfg.y_min) / static_cast<double>(cfg.y_count - 1);
  for (std::size_t i = 0; i < cfg.y_count; ++i) {
    const double y = cfg.y_min + dy * static_cast<double>(i);
    double acc = 0.5 * wnu[0] * kstar[0] * mstar[0].real();
    for (std::size_t m = 1; m <= half; ++m) {
      if (kstar[m] == 0.0) continue;
      const double phase = dnu * static_cast<double>(m) * y;
      acc += wnu[m] * kstar[m] *
             (mstar[m] * cplx(std::cos(phase), std::sin(phase))).real();
    }
    out[i] = acc / pi;
  }
  return out;
}

// ---------------------------------------------------------------------------
// error decomposition
// ---------------------------------------------------------------------------

double l2_norm(std::span<const double> values, double dy) {
  if (values.size() < 2) return 0.0;
  KahanSum s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
    s += w * values[i] * values[i];
  }
  return std::sqrt(s.value() * dy);
}

ErrorDecomposition error_decomposition(const MarkModel& model, double lambda,
                                       const EstimatorConfig& cfg,
                                       std::size_t n, std::size_t n_reference,
                                       std::uint64_t seed) {
  if (!model.has_density())
    throw Error(ErrorCode::OracleUnavailable,
                "error_decomposition: model has no closed-form density");
  CycleSet data = simulate_cycles(lambda, model, StopRule::num_cycles(n),
                                  derive_seed(seed, 11));
  CycleSet ref = simulate_cycles(lambda, model, StopRule::num_cycles(n_reference),
                                 derive_seed(seed, 12));

  DensityEstimate m_hat = estimate_density(data, cfg);
  const double lambda_hat = m_hat.lambda_hat;

  EmpiricalTransform xf_ref(ref, cfg.c);
  DensityEstimate tilde_true =
      estimate_density_with(xf_ref, lambda, ref.size(), cfg);
  DensityEstimate tilde_hat =
      estimate_density_with(xf_ref, lambda_hat, ref.size(), cfg);

  std::vector<double> km = smoothed_true_density(model, cfg);

  ErrorDecomposition dec;
  dec.lambda_hat = lambda_hat;
  dec.y = m_hat.y;
  const std::size_t ny = m_hat.y.size();
  dec.b1.resize(ny);
  dec.b2.resize(ny);
  dec.v1.resize(ny);
  dec.v2.resize(ny);
  dec.total.resize(ny);
  std::vector<double> resid(ny);
  for (std::size_t i = 0; i < ny; ++i) {
    const double m_true = model.eval_true_density(m_hat.y[i]);
    dec.b1[i] = km[i] - m_true;
    dec.b2[i] = tilde_true.m_hat[i] - km[i];
    dec.v1[i] = tilde_hat.m_hat[i] - tilde_true.m_hat[i];
    dec.v2[i] = m_hat.m_hat[i] - tilde_hat.m_hat[i];
    dec.total[i] = m_hat.m_hat[i] - m_true;
    resid[i] = dec.b1[i] + dec.b2[i] + dec.v1[i] + dec.v2[i] - dec.total[i];
  }
  const double dy = dec.y[1] - dec.y[0];
  dec.b1_l2 = l2_norm(dec.b1, dy);
  dec.b2_l2 = l2_norm(dec.b2, dy);
  dec.v1_l2 = l2_norm(dec.v1, dy);
  dec.v2_l2 = l2_norm(dec.v2, dy);
  dec.total_l2 = l2_norm(dec.total, dy);
  dec.identity_residual_l2 = l2_norm(resid, dy);
  return dec;
}

// ---------------------------------------------------------------------------
// MISE study
// ---------------------------------------------------------------------------

double integrated_squared_error(const DensityEstimate& est,
                                const MarkModel& model) {
  KahanSum s;
  for (std::size_t i = 0; i + 1 < est.y.size(); ++i) {
    const double d0 = est.m_hat[i] - model.eval_true_density(est.y[i]);
    const double d1 = est.m_hat[i + 1] - model.eval_true_density(est.y[i + 1]);
    s += 0.5 * (d0 * d0 + d1 * d1) * (est.y[i + 1] - est.y[i]);
  }
  return s.value();
}

MiseReport run_mise_study(const MarkModel& model, const EstimatorConfig& base,
                          const MiseStudyOptions& options) {
  if (options.values.empty())
    throw Error(ErrorCode::Config, "mise study: no axis values");
  if (options.replicates < 1)
    throw Error(ErrorCode::Config, "mise study: replicates must be >= 1");

  MiseReport report;
  report.axis = options.axis;
  report.base_config = base;
  report.lambda = options.lambda;
  report.replicates = options.replicates;
  report.base_n = options.n;
  report.seed = options.seed;
  report.model_description = model.description();

  const std::size_t rows = options.values.size();
  const std::size_t jobs = rows * options.replicates;
  std::vector<double> ise(jobs, -1.0); // -1 marks an excluded replicate
  std::vector<std::unique_ptr<DensityEstimate>> spectra(jobs);

  parallel_for(jobs, options.threads, [&](std::size_t job) {
    const std::size_t row = job / options.replicates;
    const std::size_t rep = job % options.replicates;
    const double value = options.values[row];

    std::size_t n = options.n;
    EstimatorConfig cfg = base;
    cfg.threads = 1; // replicate-level parallelism only
    if (options.axis == MiseAxis::N)
      n = static_cast<std::size_t>(value);
    else if (options.axis == MiseAxis::C)
      cfg.c = value;

    try {
      CycleSet cycles =
          simulate_cycles(options.lambda, model, StopRule::num_cycles(n),
                          derive_seed(options.seed, job));
      if (options.axis == MiseAxis::X) {
        if (value < 0.0) { // data-driven: x = max X'
          double mx = 0.0;
          for (const Cycle& c : cycles.cycles) mx = std::max(mx, c.duration);
          cfg.x_trunc = mx;
        } else {
          cfg.x_trunc = value;
        }
      }
      DensityEstimate est = estimate_density(cycles, cfg);
      ise[job] = integrated_squared_error(est, model);
      if (rep == 0) spectra[job] = std::make_unique<DensityEstimate>(std::move(est));
    } catch (const Error&) {
      ise[job] = -1.0;
    }
  });

  for (std::size_t row = 0; row < rows; ++row) {
    MiseRow r;
    r.axis_value = options.values[row];
    r.x_is_data_max = options.axis == MiseAxis::X && options.values[row] < 0.0;
    KahanSum sum;
    for (std::size_t rep = 0; rep < options.replicates; ++rep) {
      const double v = ise[row * options.replicates + rep];
      if (v < 0.0) {
        ++r.excluded;
        continue;
      }
      r.replicate_ise.push_back(v);
      sum += v;
    }
    const auto kept = static_cast<double>(r.replicate_ise.size());
    if (kept > 0.0) {
      r.mean_ise = sum.value() / kept;
      if (kept > 1.0) {
        KahanSum sq;
        for (double v : r.replicate_ise)
          sq += (v - r.mean_ise) * (v - r.mean_ise);
        r.std_error = std::sqrt(sq.value() / (kept - 1.0) / kept);
      }
    }
    if (spectra[row * options.replicates])
      report.sample_spectra.push_back(*spectra[row * options.replicates]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------
// distributional checks and the brute-force oracle
// ---------------------------------------------------------------------------

double ks_statistic_exponential(std::span<const double> idles, double lambda) {
  if (idles.empty())
    throw Error(ErrorCode::EmptyStream, "ks_statistic: no samples");
  std::vector<double> sorted(idles.begin(), idles.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = -std::expm1(-lambda * sorted[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

CycleSet rasterized_cycles(const std::vector<PhotonEvent>& events,
                           double grid_step) {
  if (events.empty())
    throw Error(ErrorCode::EmptyStream, "rasterized_cycles: no events");
  double t_end = 0.0;
  for (const auto& ev : events) t_end = std::max(t_end, ev.arrival + ev.duration);
  const auto cells = static_cast<std::size_t>(std::ceil(t_end / grid_step)) + 2;

  // occupancy of 1{W(t) > 0} via an interval difference array
  std::vector<int> diff(cells + 1, 0);
  for (const auto& ev : events) {
    auto lo = static_cast<std::size_t>(std::ceil(ev.arrival / grid_step));
    auto hi = static_cast<std::size_t>(
        std::ceil((ev.arrival + ev.duration) / grid_step));
    hi = std::min(hi, cells);
    if (lo < hi) {
      diff[lo] += 1;
      diff[hi] -= 1;
    }
  }

  struct Run {
    std::size_t lo, hi;
    KahanSum energy;
    std::size_t photons = 0;
  };
  std::vector<Run> runs;
  int level = 0;
  for (std::size_t j = 0; j < cells; ++j) {
    const int prev = level;
    level += diff[j];
    if (prev == 0 && level > 0) runs.push_back({j, j, KahanSum{}, 0});
    if (prev > 0 && level == 0) runs.back().hi = j;
  }

  for (const auto& ev : events) {
    const auto cell = static_cast<std::size_t>(std::ceil(ev.arrival / grid_step));
    bool placed = false;
    for (auto& run : runs)
      if (cell >= run.lo && cell < run.hi) {
        run.energy += ev.energy;
        run.photons += 1;
        placed = true;
        break;
      }
    if (!placed)
      throw Error(ErrorCode::NanDetected,
                  "rasterized_cycles: photon fell outside every busy run");
  }

  CycleSet out;
  if (runs.empty())
    throw Error(ErrorCode::EmptyStream, "rasterized_cycles: no complete cycle");
  double prev_end = 0.0;
  for (const Run& run : runs) {
    const double start = static_cast<double>(run.lo) * grid_step;
    const double end = static_cast<double>(run.hi) * grid_step;
    out.cycles.push_back({start - prev_end, end - start, run.energy.value()});
    prev_end = end;
  }
  return out;
}

} // namespace pileup
