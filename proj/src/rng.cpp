#include "pileup/rng.hpp"

namespace pileup {

// Marsaglia-Tsang squeeze method, shape >= 1.
double sample_gamma(double shape, Rng& rng) {
  if (shape < 1.0)
    throw std::invalid_argument("sample_gamma: shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = rng.normal();
    double t = 1.0 + c * z;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = rng.uniform_pos();
    double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
    if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_truncated_gamma(double shape, double trunc, Rng& rng) {
  if (trunc <= 0.0)
    throw std::invalid_argument("sample_truncated_gamma: trunc must be > 0");
  // Plain rejection from the untruncated law; the acceptance probability
  // is the truncation mass. A million consecutive rejections puts that
  // mass below ~1e-6 with overwhelming probability.
  constexpr std::size_t kMaxAttempts = 1'000'000;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    double v = sample_gamma(shape, rng);
    if (v <= trunc && v > 0.0) return v;
  }
  throw Error(ErrorCode::RejectionStall,
              "truncated gamma sampler stalled (shape=" + std::to_string(shape) +
                  ", trunc=" + std::to_string(trunc) + ")");
}

} // namespace pileup
