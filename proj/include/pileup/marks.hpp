#pragma once
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pileup/rng.hpp"

namespace pileup {

/// Gaussian N(mean, std) restricted to [lower, upper].
struct TruncatedGaussianSpec {
  double mean = 0.0;
  double std = 1.0;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  void validate() const;
  double sample(Rng& rng) const;
  double pdf(double v) const;
  double expectation() const;
  /// Probability mass of the untruncated Gaussian inside [lower, upper].
  double mass() const;
};

/// Density tabulated on a strictly increasing grid, linearly interpolated
/// and renormalized on construction. Sampling is exact inverse-CDF on the
/// piecewise-linear density.
class TabulatedDensity {
public:
  TabulatedDensity(std::vector<double> y, std::vector<double> density);

  double pdf(double v) const;
  double sample(Rng& rng) const;
  double expectation() const;
  double y_min() const { return y_.front(); }
  double y_max() const { return y_.back(); }

private:
  std::vector<double> y_;
  std::vector<double> d_;   // renormalized density values
  std::vector<double> cdf_; // cdf at grid points, cdf_.back() == 1
};

struct Mark {
  double x; // pulse duration
  double y; // pulse energy
};

/// Joint law of the (duration, energy) mark attached to each photon.
class MarkModel {
public:
  enum class Kind { IndependentBimodal, ConditionalGamma, MGInfinity, Custom };

  using Sampler = std::function<Mark(Rng&)>;
  using Density = std::function<double(double)>;

  static MarkModel bimodal();
  /// Conditional-Gamma model: Y ~ marginal, then X | Y=y is Gamma with
  /// unit scale and shape 2 + y/1024, truncated at 4 + y/2048.
  /// The default marginal is the bimodal energy law; a tabulated density
  /// may be supplied instead.
  static MarkModel conditional_gamma();
  static MarkModel conditional_gamma(TabulatedDensity marginal);
  /// M/G/infinity: Y == X with X drawn from `service`; `service_density`
  /// and `service_mean`, when given, enable eval_true_density and the
  /// moment oracles.
  static MarkModel mg_infinity(std::function<double(Rng&)> service,
                               Density service_density = nullptr,
                               std::optional<double> service_mean = {});
  static MarkModel mg_infinity_exponential(double rate);
  static MarkModel custom(Sampler sampler, Density density = nullptr,
                          std::optional<double> mean_x = {},
                          std::optional<double> mean_y = {},
                          std::optional<double> x_max = {});

  Kind kind() const { return kind_; }
  const std::string& description() const { return description_; }

  /// Draw one mark; both coordinates are guaranteed positive.
  Mark sample(Rng& rng) const;

  /// Marginal energy density m(y); 0 for y <= 0.
  /// Throws UNAVAILABLE for custom models without a registered density.
  double eval_true_density(double y) const;
  bool has_density() const { return static_cast<bool>(density_); }

  /// E[X], E[Y] from closed forms or quadrature (not Monte-Carlo).
  double mean_x() const;
  double mean_y() const;

  /// Almost-sure upper bound for X when one is known.
  std::optional<double> x_max() const { return x_max_; }

  // Bimodal parameters, exposed for tests and reports.
  const TruncatedGaussianSpec& bimodal_x() const { return x_spec_; }
  const std::vector<std::pair<double, TruncatedGaussianSpec>>&
  bimodal_mixture() const {
    return y_mix_;
  }

  /// Conditional-Gamma shape/truncation at a given energy.
  static double cg_shape(double y) { return 2.0 + y / 1024.0; }
  static double cg_trunc(double y) { return 4.0 + y / 2048.0; }

private:
  MarkModel() = default;

  static MarkModel conditional_gamma_impl(Sampler y_sampler, Density y_density,
                                          double y_mean, double y_max,
                                          std::string description);

  Kind kind_ = Kind::Custom;
  std::string description_;
  Sampler sampler_;
  Density density_;
  std::optional<double> mean_x_;
  std::optional<double> mean_y_;
  std::optional<double> x_max_;

  // bimodal pieces (also reused as the default conditional-gamma marginal)
  TruncatedGaussianSpec x_spec_;
  std::vector<std::pair<double, TruncatedGaussianSpec>> y_mix_;
};

/// Mean of Gamma(shape, scale 1) truncated to (0, trunc], by quadrature.
double truncated_gamma_mean(double shape, double trunc);

} // namespace pileup
