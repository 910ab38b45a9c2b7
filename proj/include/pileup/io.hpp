#pragma once
#include <filesystem>
#include <string>

#include "json.hpp"

#include "pileup/inversion.hpp"
#include "pileup/validation.hpp"

namespace pileup {

using json = nlohmann::json;

/// Full-precision decimal rendering (17 significant digits).
std::string format_double(double v);

/// Cycle CSV: header `idle,duration,energy`, one row per cycle.
void write_cycles_csv(const CycleSet& cycles, const std::filesystem::path& path);
/// Parse a cycle CSV; PARSE errors name the offending line. The optional
/// sidecar metadata (seed, lambda_true, model) is merged when present.
CycleSet read_cycles_csv(const std::filesystem::path& path);

/// Sidecar metadata for a simulated cycle set.
void write_cycles_metadata(const CycleSet& cycles, const json& config_echo,
                           const std::filesystem::path& path);

/// Spectrum CSV: header `y,m_hat`.
void write_spectrum_csv(const DensityEstimate& est,
                        const std::filesystem::path& path);

/// Tabulated density CSV: header `y,density`, strictly increasing y.
TabulatedDensity read_density_csv(const std::filesystem::path& path);

json estimate_metadata(const DensityEstimate& est, const json& config_echo);
json mise_report_json(const MiseReport& report, const json& config_echo);
void write_mise_csv(const MiseReport& report, const std::filesystem::path& path);

void write_json(const json& j, const std::filesystem::path& path);

/// FNV-1a hash of a canonical config rendering, for reproducibility stamps.
std::uint64_t config_hash(const json& config_echo);

} // namespace pileup
