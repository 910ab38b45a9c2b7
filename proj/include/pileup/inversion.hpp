#pragma once
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pileup/transform.hpp"

namespace pileup {

/// Smoothing kernel, described through its Fourier transform K*, which
/// has compact support [-1, 1] and K*(0) = 1.
struct Kernel {
  enum class Kind { Sinc, FlatTopTrapezoid };
  Kind kind = Kind::Sinc;
  double flat = 0.5; // flat half-width a in (0,1), trapezoid only

  /// K*(nu): indicator of [-1,1] (Sinc) or 1 on [-a,a] with a linear
  /// ramp to 0 at +-1 (FlatTopTrapezoid).
  double fourier(double nu) const;
  /// Spatial kernel K(u); integrates to 1.
  double spatial(double u) const;
  /// int K^2 (used by error reports).
  double l2_norm_sq() const;
  std::string name() const;
};

/// All tuning knobs of the estimator.
struct EstimatorConfig {
  double c = 1e-4;        // Bromwich abscissa
  double x_trunc = 60.0;  // duration truncation bound x
  double h = 2.0;         // bandwidth
  double omega_max = 0.0; // 0 = auto: max(200, 40 / (c + lambda_hat))
  std::size_t omega_points = 0; // 0 = auto from the resolution invariant
  Kernel kernel;
  double y_min = 0.0;
  double y_max = 200.0;
  std::size_t y_count = 1024;
  double denominator_floor = 0.0; // 0 = auto, see resolved_floor()
  double nu_oversample = 1.0;     // >1 tightens the nu spacing
  bool project_density = false;   // clip at 0 and renormalize the output
  int threads = 0;                // 0 = hardware concurrency

  void validate() const;
  double resolved_omega_max(double lambda_hat) const;
  /// Node count of the uniform base grid on [-Omega, Omega]; enforces
  /// omega_points >= 8 * omega_max * x / pi for the truncation bound in
  /// use (x_trunc for the full estimator, the op argument otherwise).
  std::size_t resolved_omega_points(double omega_max, double x) const;
  /// Default floor 0.05 (c + lambda) e^{-(c + 2 lambda) x}.
  double resolved_floor(double lambda_hat) const;
};

/// Density estimate on a y grid plus everything needed to reproduce it.
struct DensityEstimate {
  std::vector<double> y;
  std::vector<double> m_hat;
  EstimatorConfig config;
  double lambda_hat = 0.0;
  std::size_t n_cycles = 0;
  // numerical-health metadata
  double min_denominator = 0.0;
  double denominator_floor = 0.0;
  double i2_tail_bound = 0.0;
  double a2_tail_bound = 0.0;
};

struct QuadratureResult {
  cplx value;
  double tail_bound = 0.0;
};

/// Composite Simpson over the uniform grid on [-omega_max, omega_max].
/// The tail estimate is C * omega_max^(1 - decay_order) with C fitted
/// from the last decade of |f|. When osc_scale > 0 the node count must
/// satisfy omega_points >= 8 * omega_max * osc_scale / pi (RESOLUTION
/// error otherwise).
QuadratureResult quadrature(const std::function<cplx(double)>& f,
                            double omega_max, std::size_t omega_points,
                            int decay_order, double osc_scale = 0.0);

/// Symmetric panel grid on [-Omega, Omega]: a uniform base grid refined
/// by geometric zoom panels around omega = 0, where the integrands have
/// a peak of width ~ c + lambda(1 - Re L-hat).
std::vector<OmegaPanel> make_bromwich_panels(double c, double omega_max,
                                             std::size_t omega_points);
std::size_t panel_node_count(std::span<const OmegaPanel> panels);
/// Simpson weights for every panel node, concatenated.
std::vector<double> panel_weights(std::span<const OmegaPanel> panels);

/// a-hat_n(x, i nu): plug-in Bromwich inversion of the busy-period
/// transform; equals 1 + lambda a1 + lambda a2 with a1 in closed form
/// and a2 integrated numerically.
cplx a_hat(const EmpiricalTransform& xf, double lambda_hat, double x, double nu,
           const EstimatorConfig& cfg);

/// I1-hat: (1/n) sum 1(X'_k <= x) exp(lambda_hat X'_k - i nu Y'_k).
cplx i1_hat(const CycleSet& cycles, double lambda_hat, double x, double nu);

/// I2-hat: oscillatory Bromwich integral of the squared transform.
cplx i2_hat(const EmpiricalTransform& xf, double lambda_hat, double x, double nu,
            const EstimatorConfig& cfg);

/// Full estimator m-hat_{x,h,n} on the configured y grid.
DensityEstimate estimate_density(const CycleSet& cycles,
                                 const EstimatorConfig& cfg);

/// Same pipeline fed with externally supplied intensity and transform
/// (the simulation-mode oracle); used by the error decomposition.
DensityEstimate estimate_density_with(const EmpiricalTransform& xf,
                                      double lambda_hat, std::size_t n_cycles,
                                      const EstimatorConfig& cfg);

/// Clip negative values to 0 and renormalize to unit mass (trapezoid).
void project_density(DensityEstimate& est);

/// Trapezoid integral of the estimate over its grid.
double integrate_estimate(const DensityEstimate& est);

} // namespace pileup
