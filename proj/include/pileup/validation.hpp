#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pileup/inversion.hpp"

namespace pileup {

struct DirectAResult {
  cplx value;
  double std_error = 0.0; // MC error propagated through the exponential
};

/// Monte-Carlo evaluation of a(u, p) = exp(lambda E[e^{-pY} (u - X)+])
/// from n_mc fresh mark draws.
DirectAResult direct_a(const MarkModel& model, double lambda, double x, cplx p,
                       std::size_t n_mc, std::uint64_t seed);

struct Theorem1Report {
  cplx lhs;
  cplx rhs;
  double lhs_std_error = 0.0;
  double rhs_std_error = 0.0;
  double abs_discrepancy = 0.0;
  double rel_discrepancy = 0.0;
};

/// Check the key identity: the u-integral of e^{-(s+lambda)u}(a(u,p)-1)
/// against lambda L(s,p) / ((s+lambda)(s+lambda-lambda L(s,p))), the two
/// sides coming from independent pipelines (fresh mark draws vs simulated
/// cycles).
Theorem1Report theorem1_check(const MarkModel& model, double lambda, cplx s,
                              cplx p, std::size_t n_cycles, std::size_t n_mc,
                              std::uint64_t seed);

/// Plain kernel density estimate with the estimator's kernel machinery.
DensityEstimate reference_kde(std::span<const double> samples, double h,
                              const Kernel& kernel, double y_min, double y_max,
                              std::size_t y_count);

/// Deterministic smoothing target (K_h * m)(y) on a y grid, computed by
/// Fourier synthesis on the same nu grid the estimator uses.
std::vector<double> smoothed_true_density(const MarkModel& model,
                                          const EstimatorConfig& cfg);

struct ErrorDecomposition {
  std::vector<double> y;
  std::vector<double> b1; // smoothing bias: K_h * m - m
  std::vector<double> b2; // truncation bias: m~(lambda, P') - K_h * m
  std::vector<double> v1; // m~(lambda_hat, P') - m~(lambda, P')
  std::vector<double> v2; // m-hat - m~(lambda_hat, P')
  std::vector<double> total; // m-hat - m
  double b1_l2 = 0.0, b2_l2 = 0.0, v1_l2 = 0.0, v2_l2 = 0.0;
  double total_l2 = 0.0;
  double identity_residual_l2 = 0.0; // ||b1+b2+v1+v2 - total||_2
  double lambda_hat = 0.0;
};

/// Decompose m-hat - m into the two bias and two fluctuation terms,
/// using an independent reference cycle set of n_reference cycles as the
/// P' oracle. Simulation mode only (model must expose its density).
ErrorDecomposition error_decomposition(const MarkModel& model, double lambda,
                                       const EstimatorConfig& cfg,
                                       std::size_t n, std::size_t n_reference,
                                       std::uint64_t seed);

/// Integrated squared error between an estimate and the model density,
/// trapezoid on the estimate's own grid.
double integrated_squared_error(const DensityEstimate& est,
                                const MarkModel& model);
double l2_norm(std::span<const double> values, double dy);

enum class MiseAxis { N, C, X };

struct MiseRow {
  double axis_value = 0.0;     // n, c or x (x = observed max X' when data-driven)
  bool x_is_data_max = false;
  std::vector<double> replicate_ise;
  double mean_ise = 0.0;
  double std_error = 0.0;
  std::size_t excluded = 0;    // replicates lost to estimator errors
};

struct MiseReport {
  MiseAxis axis;
  std::vector<MiseRow> rows;
  EstimatorConfig base_config;
  double lambda = 0.0;
  std::size_t replicates = 0;
  std::size_t base_n = 0;
  std::uint64_t seed = 0;
  std::string model_description;
  /// First replicate's spectrum per row, for plotting.
  std::vector<DensityEstimate> sample_spectra;
};

struct MiseStudyOptions {
  MiseAxis axis = MiseAxis::N;
  std::vector<double> values; // for axis X, a negative value means max X'
  std::size_t replicates = 10;
  std::size_t n = 10000; // cycle count for the C and X axes
  double lambda = 0.04;
  std::uint64_t seed = 20240401;
  int threads = 0;
};

/// Monte-Carlo MISE study over one axis (Table-1 style).
MiseReport run_mise_study(const MarkModel& model, const EstimatorConfig& base,
                          const MiseStudyOptions& options);

/// Kolmogorov-Smirnov statistic of the idle durations against
/// Exp(lambda).
double ks_statistic_exponential(std::span<const double> idles, double lambda);

/// Brute-force oracle: rasterize the on-off process 1{W(t) > 0} on a
/// fine grid and read the cycles off the raster. Used to cross-check
/// extract_cycles on short streams.
CycleSet rasterized_cycles(const std::vector<PhotonEvent>& events,
                           double grid_step);

} // namespace pileup
