#pragma once
#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pileup/numeric.hpp"
#include "pileup/simulate.hpp"

namespace pileup {

/// Maximum-likelihood Poisson intensity from the idle durations:
/// (mean idle)^-1. Throws EMPTY_STREAM on an empty cycle set.
double estimate_lambda(const CycleSet& cycles);

/// One uniform run of Bromwich abscissas: nodes omega_start + j*step,
/// j = 0..count-1, with attached quadrature weights.
struct OmegaPanel {
  double start = 0.0;
  double step = 0.0;
  std::size_t count = 0; // nodes, odd within a panel (composite Simpson)
};

/// Empirical bivariate Laplace transform of the busy-period law,
/// (1/n) sum_k exp(-s X'_k - p Y'_k), bound to one CycleSet and one
/// Bromwich abscissa c. Rows along a panel grid at fixed nu reuse
/// per-cycle phase recurrences; the cached tables are an optimization
/// only and do not change any value.
class EmpiricalTransform {
public:
  EmpiricalTransform(const CycleSet& cycles, double c);

  /// Exact single-point evaluation with compensated summation.
  cplx operator()(cplx s, cplx p) const;

  /// L-hat(c + i omega_j, i nu) for every node of `panels`, appended
  /// row-major into `out` (resized by the caller). Deterministic
  /// fixed-order accumulation.
  void eval_row(std::span<const OmegaPanel> panels, double nu,
                std::span<cplx> out) const;

  double abscissa() const { return c_; }
  std::size_t size() const { return n_; }
  std::span<const double> busy_durations() const { return x_; }
  std::span<const double> busy_energies() const { return y_; }

private:
  double c_ = 0.0;
  std::size_t n_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> damp_; // exp(-c X'_k) / n
};

/// Exact transform used as the reference side of the diagnostics.
using LaplaceOracle = std::function<cplx(cplx s, cplx p)>;

inline LaplaceOracle make_oracle(const EmpiricalTransform& ref) {
  return [&ref](cplx s, cplx p) { return ref(s, p); };
}

/// Delta-hat_n(W): max over the (omega, nu) grid on [-W, W]^2 of
/// |L P'(c + i omega, i nu) - L-hat P'_n(c + i omega, i nu)|.
double delta_diagnostic(const EmpiricalTransform& xf, const LaplaceOracle& oracle,
                        double W, double grid_step);

/// Fast path when the oracle is itself an EmpiricalTransform (the
/// simulation-mode reference set).
double delta_diagnostic(const EmpiricalTransform& xf,
                        const EmpiricalTransform& oracle, double W,
                        double grid_step);

/// E-hat_n(W; x, lambda~): sup over nu in [-W, W] of the discrepancy of
/// the functional 1_[0,x](u) e^{lambda~ (u - x)} e^{-i nu y}.
double e_diagnostic(const EmpiricalTransform& xf,
                    const EmpiricalTransform& oracle, double W, double x,
                    double lambda_tilde, double grid_step);

struct DiagnosticReport {
  double W = 0.0;
  double grid_step = 0.0;
  double value = 0.0;
};

} // namespace pileup
