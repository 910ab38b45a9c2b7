#include "pileup/simulate.hpp"

#include <cmath>

namespace pileup {

StopRule StopRule::num_cycles(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::Config, "StopRule: n_cycles must be >= 1");
  StopRule r;
  r.kind = Kind::NumCycles;
  r.n_cycles = n;
  return r;
}

StopRule StopRule::fixed_duration(double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::Config, "StopRule: duration must be > 0");
  StopRule r;
  r.kind = Kind::FixedDuration;
  r.duration = t;
  return r;
}

std::vector<PhotonEvent> simulate_photons(double lambda, const MarkModel& model,
                                          const StopRule& stop,
                                          std::uint64_t seed) {
  if (!(lambda > 0.0))
    throw Error(ErrorCode::Config, "simulate_photons: lambda must be > 0");

  Rng rng(seed);
  std::vector<PhotonEvent> events;
  double t = 0.0;
  double busy_end = 0.0;        // end of the currently open busy period
  std::size_t busy_first = 0;   // index of the first event of that period
  std::size_t closed = 0;       // completed busy periods so far
  bool busy_open = false;

  for (;;) {
    t += rng.exponential(lambda);
    if (stop.kind == StopRule::Kind::FixedDuration && t > stop.duration) break;

    // An arrival at or beyond the current busy end closes it (exact
    // ties open a new cycle).
    if (busy_open && t >= busy_end) {
      ++closed;
      busy_open = false;
      // The closing arrival itself is not recorded once the quota is
      // reached, so the stream holds exactly n busy periods.
      if (stop.kind == StopRule::Kind::NumCycles && closed >= stop.n_cycles)
        return events;
    }

    if (!busy_open) busy_first = events.size();
    Mark mk = model.sample(rng);
    events.push_back({t, mk.x, mk.y});
    busy_open = true;
    busy_end = std::max(busy_end, t + mk.x);
  }

  // Fixed window: a busy period still in progress at the horizon is
  // unobserved; drop its events.
  if (busy_open && busy_end > stop.duration) events.resize(busy_first);
  return events;
}

CycleSet extract_cycles(const std::vector<PhotonEvent>& events) {
  CycleSet out;
  if (events.empty())
    throw Error(ErrorCode::EmptyStream, "extract_cycles: no events");

  double prev_arrival = 0.0;
  double prev_cycle_end = 0.0; // T'_{k-1} + X'_{k-1}, 0 before the first cycle
  double busy_start = 0.0;
  double busy_end = 0.0;
  KahanSum busy_energy;
  bool busy_open = false;

  for (const PhotonEvent& ev : events) {
    if (!(ev.arrival > prev_arrival))
      throw Error(ErrorCode::Parse,
                  "extract_cycles: arrivals must be strictly increasing");
    if (!(ev.duration > 0.0) || !(ev.energy > 0.0))
      throw Error(ErrorCode::Parse, "extract_cycles: marks must be positive");
    prev_arrival = ev.arrival;

    if (busy_open && ev.arrival < busy_end) {
      // still inside the current busy period
      busy_end = std::max(busy_end, ev.arrival + ev.duration);
      busy_energy += ev.energy;
      continue;
    }
    if (busy_open) {
      // the previous busy period just closed
      out.cycles.push_back({busy_start - prev_cycle_end, busy_end - busy_start,
                            busy_energy.value()});
      prev_cycle_end = busy_end;
    }
    busy_start = ev.arrival;
    busy_end = ev.arrival + ev.duration;
    busy_energy.reset();
    busy_energy += ev.energy;
    busy_open = true;
  }
  // The stream is the full photon record, so the final busy period is
  // complete as well.
  if (busy_open)
    out.cycles.push_back({busy_start - prev_cycle_end, busy_end - busy_start,
                          busy_energy.value()});

  if (out.cycles.empty())
    throw Error(ErrorCode::EmptyStream, "extract_cycles: no complete cycle");
  return out;
}

CycleSet simulate_cycles(double lambda, const MarkModel& model,
                         const StopRule& stop, std::uint64_t seed) {
  auto events = simulate_photons(lambda, model, stop, seed);
  CycleSet cycles = extract_cycles(events);
  cycles.lambda_true = lambda;
  cycles.seed = seed;
  cycles.model_description = model.description();
  return cycles;
}

double expected_busy_duration(double lambda, double mean_x) {
  // (e^{lambda E[X]} - 1) / lambda, via expm1 to stay exact as lambda -> 0
  return std::expm1(lambda * mean_x) / lambda;
}

double expected_busy_energy(double lambda, double mean_x, double mean_y) {
  return mean_y * std::exp(lambda * mean_x);
}

namespace {

MomentCheckRow make_row(std::string name, std::span<const double> values,
                        double target) {
  const double n = static_cast<double>(values.size());
  const double mean = kahan_mean(values);
  KahanSum sq;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq.value() / (n - 1.0));
  const double se = sd / std::sqrt(n);
  return {std::move(name), mean, se, target, (mean - target) / se};
}

} // namespace

MomentCheckReport cycle_moment_check(const CycleSet& cycles, double lambda,
                                     double mean_x, double mean_y) {
  if (cycles.empty())
    throw Error(ErrorCode::EmptyStream, "cycle_moment_check: no cycles");
  std::vector<double> xs, ys;
  xs.reserve(cycles.size());
  ys.reserve(cycles.size());
  for (const Cycle& c : cycles.cycles) {
    xs.push_back(c.duration);
    ys.push_back(c.energy);
  }
  return {make_row("busy_duration", xs, expected_busy_duration(lambda, mean_x)),
          make_row("busy_energy", ys,
                   expected_busy_energy(lambda, mean_x, mean_y))};
}

} // namespace pileup
