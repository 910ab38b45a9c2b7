#pragma once
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>

namespace pileup {

using cplx = std::complex<double>;

/// Kahan-Neumaier compensated accumulator. Summing up to 1e6 terms of
/// mixed magnitude keeps the result within a few ulps of the exact sum.
class KahanSum {
public:
  KahanSum() = default;
  explicit KahanSum(double v) : sum_(v) {}

  KahanSum& operator+=(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
    return *this;
  }

  double value() const { return sum_ + comp_; }
  void reset() { sum_ = 0.0; comp_ = 0.0; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Compensated complex accumulator (independent real/imag compensation).
class KahanSumC {
public:
  KahanSumC& operator+=(cplx v) {
    re_ += v.real();
    im_ += v.imag();
    return *this;
  }
  cplx value() const { return {re_.value(), im_.value()}; }

private:
  KahanSum re_, im_;
};

double kahan_mean(std::span<const double> xs);

/// Standard normal density.
inline double normal_pdf(double z) {
  return 0.3989422804014326779 * std::exp(-0.5 * z * z);
}

/// Standard normal CDF, accurate in both tails.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

/// log Gamma(x) via std::lgamma (kept as a seam for testing).
inline double log_gamma(double x) { return std::lgamma(x); }

/// Regularized lower incomplete gamma P(a, x) by series/continued fraction.
double gamma_cdf(double a, double x);

} // namespace pileup
