#include "pileup/marks.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

namespace pileup {

// ---------------------------------------------------------------------------
// TruncatedGaussianSpec
// ---------------------------------------------------------------------------

void TruncatedGaussianSpec::validate() const {
  if (!(std > 0.0))
    throw Error(ErrorCode::Config, "truncated gaussian: std must be > 0");
  if (!(lower < upper))
    throw Error(ErrorCode::Config, "truncated gaussian: lower must be < upper");
}

double TruncatedGaussianSpec::mass() const {
  const double alpha = (lower - mean) / std;
  const double upper_cdf =
      std::isinf(upper) ? 1.0 : normal_cdf((upper - mean) / std);
  return upper_cdf - normal_cdf(alpha);
}

double TruncatedGaussianSpec::pdf(double v) const {
  if (v < lower || v > upper) return 0.0;
  const double z = (v - mean) / std;
  const double d = normal_pdf(z) / (std * mass());
  return d < DBL_MIN ? 0.0 : d;
}

double TruncatedGaussianSpec::expectation() const {
  const double alpha = (lower - mean) / std;
  const double phi_upper =
      std::isinf(upper) ? 0.0 : normal_pdf((upper - mean) / std);
  return mean + std * (normal_pdf(alpha) - phi_upper) / mass();
}

double TruncatedGaussianSpec::sample(Rng& rng) const {
  const double plo = normal_cdf((lower - mean) / std);
  const double phi = std::isinf(upper) ? 1.0 : normal_cdf((upper - mean) / std);
  double p = plo + rng.uniform_pos() * (phi - plo);
  p = std::clamp(p, DBL_MIN, 1.0 - DBL_EPSILON / 2);
  double v = mean + std * normal_quantile(p);
  v = std::clamp(v, lower, upper);
  if (v <= lower) v = std::nextafter(lower, upper);
  return v;
}

// ---------------------------------------------------------------------------
// TabulatedDensity
// ---------------------------------------------------------------------------

TabulatedDensity::TabulatedDensity(std::vector<double> y,
                                   std::vector<double> density)
    : y_(std::move(y)), d_(std::move(density)) {
  if (y_.size() != d_.size() || y_.size() < 2)
    throw Error(ErrorCode::Config, "tabulated density: need >= 2 grid points");
  if (y_.front() < 0.0)
    throw Error(ErrorCode::Config, "tabulated density: grid must be >= 0");
  for (std::size_t i = 0; i + 1 < y_.size(); ++i)
    if (!(y_[i] < y_[i + 1]))
      throw Error(ErrorCode::Config,
                  "tabulated density: grid must be strictly increasing");
  double total = 0.0;
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (!(d_[i] >= 0.0) || !std::isfinite(d_[i]))
      throw Error(ErrorCode::Config,
                  "tabulated density: values must be finite and >= 0");
    if (i + 1 < d_.size())
      total += 0.5 * (d_[i] + d_[i + 1]) * (y_[i + 1] - y_[i]);
  }
  if (!(total > 0.0))
    throw Error(ErrorCode::Config, "tabulated density: zero total mass");
  for (double& v : d_) v /= total;
  cdf_.resize(y_.size());
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < y_.size(); ++i)
    cdf_[i] = cdf_[i - 1] + 0.5 * (d_[i] + d_[i - 1]) * (y_[i] - y_[i - 1]);
  cdf_.back() = 1.0;
}

double TabulatedDensity::pdf(double v) const {
  if (v < y_.front() || v > y_.back()) return 0.0;
  auto it = std::upper_bound(y_.begin(), y_.end(), v);
  std::size_t i = (it == y_.begin()) ? 0 : (it - y_.begin() - 1);
  i = std::min(i, y_.size() - 2);
  double t = (v - y_[i]) / (y_[i + 1] - y_[i]);
  return d_[i] + t * (d_[i + 1] - d_[i]);
}

double TabulatedDensity::sample(Rng& rng) const {
  const double u = rng.uniform_pos();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = (it == cdf_.begin()) ? 0 : (it - cdf_.begin() - 1);
  i = std::min(i, cdf_.size() - 2);
  const double du = u - cdf_[i];
  const double w = y_[i + 1] - y_[i];
  const double d0 = d_[i], d1 = d_[i + 1];
  const double slope = (d1 - d0) / w;
  double s; // offset within the cell
  if (std::abs(slope) * w < 1e-12 * (d0 + d1 + 1e-300)) {
    s = (d0 > 0.0) ? du / d0 : 0.5 * w;
  } else {
    // invert the piecewise-quadratic CDF: slope/2 s^2 + d0 s = du
    const double disc = d0 * d0 + 2.0 * slope * du;
    s = (std::sqrt(std::max(disc, 0.0)) - d0) / slope;
  }
  double v = y_[i] + std::clamp(s, 0.0, w);
  if (v <= 0.0) v = std::nextafter(0.0, 1.0);
  return v;
}

double TabulatedDensity::expectation() const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < y_.size(); ++i) {
    const double w = y_[i + 1] - y_[i];
    acc += w * (d_[i] * (2.0 * y_[i] + y_[i + 1]) +
                d_[i + 1] * (y_[i] + 2.0 * y_[i + 1])) / 6.0;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// MarkModel builders
// ---------------------------------------------------------------------------

namespace {

// Bimodal energy mixture from the reference experiment: 0.6 N(100,6) +
// 0.4 N(130,9), truncated to the positive half-line.
std::vector<std::pair<double, TruncatedGaussianSpec>> bimodal_mixture_specs(
    double upper) {
  return {{0.6, TruncatedGaussianSpec{100.0, 6.0, 0.0, upper}},
          {0.4, TruncatedGaussianSpec{130.0, 9.0, 0.0, upper}}};
}

double mixture_pdf(const std::vector<std::pair<double, TruncatedGaussianSpec>>& mix,
                   double y) {
  if (y <= 0.0) return 0.0;
  double d = 0.0;
  for (const auto& [w, spec] : mix) d += w * spec.pdf(y);
  return d;
}

double mixture_sample(const std::vector<std::pair<double, TruncatedGaussianSpec>>& mix,
                      Rng& rng) {
  double u = rng.uniform();
  for (const auto& [w, spec] : mix) {
    if (u < w) return spec.sample(rng);
    u -= w;
  }
  return mix.back().second.sample(rng);
}

double mixture_mean(const std::vector<std::pair<double, TruncatedGaussianSpec>>& mix) {
  double m = 0.0;
  for (const auto& [w, spec] : mix) m += w * spec.expectation();
  return m;
}

} // namespace

MarkModel MarkModel::bimodal() {
  MarkModel m;
  m.kind_ = Kind::IndependentBimodal;
  m.description_ = "bimodal(X~N(20,3)+, Y~0.6N(100,6)+0.4N(130,9)+)";
  // X <= 40 almost surely (the clipped mass is ~1e-11); keeps the
  // bounded-duration regime explicit.
  m.x_spec_ = TruncatedGaussianSpec{20.0, 3.0, 0.0, 40.0};
  m.y_mix_ = bimodal_mixture_specs(std::numeric_limits<double>::infinity());
  m.x_max_ = m.x_spec_.upper;
  m.mean_x_ = m.x_spec_.expectation();
  m.mean_y_ = mixture_mean(m.y_mix_);
  auto x_spec = m.x_spec_;
  auto y_mix = m.y_mix_;
  m.sampler_ = [x_spec, y_mix](Rng& rng) {
    return Mark{x_spec.sample(rng), mixture_sample(y_mix, rng)};
  };
  m.density_ = [y_mix](double y) { return mixture_pdf(y_mix, y); };
  return m;
}

double truncated_gamma_mean(double shape, double trunc) {
  const double mass = gamma_cdf(shape, trunc);
  if (!(mass > 0.0))
    throw Error(ErrorCode::Config, "truncated_gamma_mean: zero mass");
  return shape * gamma_cdf(shape + 1.0, trunc) / mass;
}

MarkModel MarkModel::conditional_gamma_impl(Sampler y_sampler,
                                            Density y_density, double y_mean,
                                            double y_max,
                                            std::string description) {
  MarkModel m;
  m.kind_ = Kind::ConditionalGamma;
  m.description_ = std::move(description);
  m.sampler_ = [y_sampler](Rng& rng) {
    double y = y_sampler(rng).y;
    double x = sample_truncated_gamma(cg_shape(y), cg_trunc(y), rng);
    return Mark{x, y};
  };
  m.density_ = std::move(y_density);
  m.mean_y_ = y_mean;
  m.x_max_ = cg_trunc(y_max);
  // E[X] = int m(y) E[X | Y=y] dy by Simpson on a fine energy grid.
  constexpr std::size_t kGrid = 2048;
  double mean_x = 0.0;
  for (std::size_t i = 0; i <= kGrid; ++i) {
    double y = y_max * static_cast<double>(i) / kGrid;
    double w = (i == 0 || i == kGrid) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    double cond = truncated_gamma_mean(cg_shape(y), cg_trunc(y));
    mean_x += w * m.density_(y) * cond;
  }
  m.mean_x_ = mean_x * (y_max / kGrid) / 3.0;
  return m;
}

MarkModel MarkModel::conditional_gamma() {
  // Default energy law: the bimodal mixture with its far tail clipped at
  // 200 so that the duration bound 4 + y/2048 is a genuine constant.
  auto mix = bimodal_mixture_specs(200.0);
  Sampler ys = [mix](Rng& rng) {
    double y = mixture_sample(mix, rng);
    return Mark{y, y};
  };
  Density yd = [mix](double y) { return mixture_pdf(mix, y); };
  return conditional_gamma_impl(std::move(ys), std::move(yd),
                                mixture_mean(mix), 200.0,
                                "conditional-gamma(bimodal marginal)");
}

MarkModel MarkModel::conditional_gamma(TabulatedDensity marginal) {
  auto shared = std::make_shared<TabulatedDensity>(std::move(marginal));
  Sampler ys = [shared](Rng& rng) {
    double y = shared->sample(rng);
    return Mark{y, y};
  };
  Density yd = [shared](double y) { return shared->pdf(y); };
  double mean = shared->expectation();
  double ymax = shared->y_max();
  return conditional_gamma_impl(std::move(ys), std::move(yd), mean, ymax,
                                "conditional-gamma(tabulated marginal)");
}

MarkModel MarkModel::mg_infinity(std::function<double(Rng&)> service,
                                 Density service_density,
                                 std::optional<double> service_mean) {
  MarkModel m;
  m.kind_ = Kind::MGInfinity;
  m.description_ = "mg-infinity";
  m.sampler_ = [service](Rng& rng) {
    double x = service(rng);
    return Mark{x, x};
  };
  m.density_ = std::move(service_density);
  m.mean_x_ = service_mean;
  m.mean_y_ = service_mean;
  return m;
}

MarkModel MarkModel::mg_infinity_exponential(double rate) {
  if (!(rate > 0.0))
    throw Error(ErrorCode::Config, "mg_infinity_exponential: rate must be > 0");
  auto m = mg_infinity([rate](Rng& rng) { return rng.exponential(rate); },
                       [rate](double y) {
                         return y <= 0.0 ? 0.0 : rate * std::exp(-rate * y);
                       },
                       1.0 / rate);
  m.description_ = "mg-infinity(Exp(" + std::to_string(rate) + "))";
  return m;
}

MarkModel MarkModel::custom(Sampler sampler, Density density,
                            std::optional<double> mean_x,
                            std::optional<double> mean_y,
                            std::optional<double> x_max) {
  MarkModel m;
  m.kind_ = Kind::Custom;
  m.description_ = "custom";
  m.sampler_ = std::move(sampler);
  m.density_ = std::move(density);
  m.mean_x_ = mean_x;
  m.mean_y_ = mean_y;
  m.x_max_ = x_max;
  return m;
}

Mark MarkModel::sample(Rng& rng) const {
  Mark mk = sampler_(rng);
  if (!(mk.x > 0.0) || !(mk.y > 0.0) || !std::isfinite(mk.x) ||
      !std::isfinite(mk.y))
    throw Error(ErrorCode::Config,
                "mark model produced a non-positive sample (X > 0 and Y > 0 "
                "are required)");
  return mk;
}

double MarkModel::eval_true_density(double y) const {
  if (y <= 0.0) return 0.0;
  if (!density_)
    throw Error(ErrorCode::Unavailable,
                "no marginal density registered for this model");
  double d = density_(y);
  return d < DBL_MIN ? 0.0 : d;
}

double MarkModel::mean_x() const {
  if (!mean_x_)
    throw Error(ErrorCode::Unavailable, "E[X] not available for this model");
  return *mean_x_;
}

double MarkModel::mean_y() const {
  if (!mean_y_)
    throw Error(ErrorCode::Unavailable, "E[Y] not available for this model");
  return *mean_y_;
}

} // namespace pileup
