#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pileup/marks.hpp"

namespace pileup {

struct PhotonEvent {
  double arrival;  // T, strictly increasing within a stream
  double duration; // X > 0
  double energy;   // Y > 0
};

/// One observed cycle: idle gap, then a busy period.
struct Cycle {
  double idle;     // I > 0
  double duration; // X' > 0
  double energy;   // Y' > 0
};

/// Immutable ordered collection of cycles plus simulation metadata.
struct CycleSet {
  std::vector<Cycle> cycles;
  std::optional<double> lambda_true;
  std::uint64_t seed = 0;
  std::string model_description;

  std::size_t size() const { return cycles.size(); }
  bool empty() const { return cycles.empty(); }
};

struct StopRule {
  enum class Kind { NumCycles, FixedDuration };
  Kind kind = Kind::NumCycles;
  std::size_t n_cycles = 0;
  double duration = 0.0;

  static StopRule num_cycles(std::size_t n);
  static StopRule fixed_duration(double t);
};

/// Homogeneous Poisson arrivals with i.i.d. marks. The returned stream
/// is a complete photon record: under NumCycles(n) it holds the events
/// of exactly n busy periods; under FixedDuration(T) a busy period still
/// in progress at T is dropped entirely.
std::vector<PhotonEvent> simulate_photons(double lambda, const MarkModel& model,
                                          const StopRule& stop,
                                          std::uint64_t seed);

/// Reduce a complete event stream to its observable cycles via the
/// busy-period recursion.
/// Throws EMPTY_STREAM if no complete cycle exists.
CycleSet extract_cycles(const std::vector<PhotonEvent>& events);

/// Convenience: simulate and reduce in one call, recording metadata.
CycleSet simulate_cycles(double lambda, const MarkModel& model,
                         const StopRule& stop, std::uint64_t seed);

struct MomentCheckRow {
  std::string name;
  double empirical;
  double std_error;
  double target;
  double z_score;
};

struct MomentCheckReport {
  MomentCheckRow x_prime;
  MomentCheckRow y_prime;
};

/// Closed-form cycle moments: E[X'] = (e^{lambda E[X]} - 1)/lambda and
/// E[Y'] = E[Y] e^{lambda E[X]}.
double expected_busy_duration(double lambda, double mean_x);
double expected_busy_energy(double lambda, double mean_x, double mean_y);

/// Compare empirical busy moments against the closed forms.
MomentCheckReport cycle_moment_check(const CycleSet& cycles, double lambda,
                                     double mean_x, double mean_y);

} // namespace pileup
