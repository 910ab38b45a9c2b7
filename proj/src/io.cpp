#include "pileup/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "pileup/version.hpp"

namespace pileup {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::Config, "cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Parse, "cannot open: " + path.string());
  return in;
}

double parse_field(const std::string& field, const std::filesystem::path& path,
                   std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || !std::isfinite(v))
    throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) +
                                      ": bad numeric field '" + field + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

} // namespace

void write_cycles_csv(const CycleSet& cycles, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "idle,duration,energy\n";
  for (const Cycle& c : cycles.cycles)
    out << format_double(c.idle) << ',' << format_double(c.duration) << ','
        << format_double(c.energy) << '\n';
}

CycleSet read_cycles_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  CycleSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "idle,duration,energy")
        throw Error(ErrorCode::Parse,
                    path.string() + ":1: expected header 'idle,duration,energy'");
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw Error(ErrorCode::Parse, path.string() + ":" +
                                        std::to_string(line_no) +
                                        ": expected 3 fields");
    Cycle c{parse_field(fields[0], path, line_no),
            parse_field(fields[1], path, line_no),
            parse_field(fields[2], path, line_no)};
    if (!(c.idle > 0.0) || !(c.duration > 0.0) || !(c.energy > 0.0))
      throw Error(ErrorCode::Parse, path.string() + ":" +
                                        std::to_string(line_no) +
                                        ": cycle fields must be positive");
    set.cycles.push_back(c);
  }
  if (set.cycles.empty())
    throw Error(ErrorCode::EmptyStream, path.string() + ": no cycles");

  auto sidecar = path;
  sidecar += ".json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream meta(sidecar);
    json j = json::parse(meta, nullptr, true, true);
    if (j.contains("seed")) set.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("lambda_true") && !j["lambda_true"].is_null())
      set.lambda_true = j["lambda_true"].get<double>();
    if (j.contains("model")) set.model_description = j["model"].get<std::string>();
  }
  return set;
}

void write_cycles_metadata(const CycleSet& cycles, const json& config_echo,
                           const std::filesystem::path& path) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["n_cycles"] = cycles.size();
  j["seed"] = cycles.seed;
  if (cycles.lambda_true)
    j["lambda_true"] = *cycles.lambda_true;
  else
    j["lambda_true"] = nullptr;
  j["model"] = cycles.model_description;
  j["config"] = config_echo;
  j["config_hash"] = config_hash(config_echo);
  write_json(j, path);
}

void write_spectrum_csv(const DensityEstimate& est,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "y,m_hat\n";
  for (std::size_t i = 0; i < est.y.size(); ++i)
    out << format_double(est.y[i]) << ',' << format_double(est.m_hat[i]) << '\n';
}

TabulatedDensity read_density_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> ys, ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "y,density") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw Error(ErrorCode::Parse, path.string() + ":" +
                                        std::to_string(line_no) +
                                        ": expected 2 fields");
    ys.push_back(parse_field(fields[0], path, line_no));
    ds.push_back(parse_field(fields[1], path, line_no));
  }
  return TabulatedDensity(std::move(ys), std::move(ds));
}

json estimate_metadata(const DensityEstimate& est, const json& config_echo) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["lambda_hat"] = est.lambda_hat;
  j["n_cycles"] = est.n_cycles;
  j["config"] = config_echo;
  j["config_hash"] = config_hash(config_echo);
  j["guards"] = {{"min_denominator", est.min_denominator},
                 {"denominator_floor", est.denominator_floor}};
  j["tails"] = {{"i2_tail_bound", est.i2_tail_bound},
                {"a2_tail_bound", est.a2_tail_bound}};
  j["mass"] = integrate_estimate(est);
  return j;
}

json mise_report_json(const MiseReport& report, const json& config_echo) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  switch (report.axis) {
    case MiseAxis::N: j["axis"] = "n"; break;
    case MiseAxis::C: j["axis"] = "c"; break;
    case MiseAxis::X: j["axis"] = "x"; break;
  }
  j["lambda"] = report.lambda;
  j["replicates"] = report.replicates;
  j["base_n"] = report.base_n;
  j["seed"] = report.seed;
  j["model"] = report.model_description;
  j["config"] = config_echo;
  j["config_hash"] = config_hash(config_echo);
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["value"] = r.x_is_data_max ? json("max") : json(r.axis_value);
    row["mean_ise"] = r.mean_ise;
    row["std_error"] = r.std_error;
    row["excluded"] = r.excluded;
    row["replicate_ise"] = r.replicate_ise;
    j["rows"].push_back(row);
  }
  return j;
}

void write_mise_csv(const MiseReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  const char* axis = report.axis == MiseAxis::N
                         ? "n"
                         : (report.axis == MiseAxis::C ? "c" : "x");
  out << axis << ",mean_ise,std_error,replicates,excluded\n";
  for (const auto& r : report.rows) {
    if (r.x_is_data_max)
      out << "max";
    else
      out << format_double(r.axis_value);
    out << ',' << format_double(r.mean_ise) << ',' << format_double(r.std_error)
        << ',' << r.replicate_ise.size() << ',' << r.excluded << '\n';
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::uint64_t config_hash(const json& config_echo) {
  const std::string s = config_echo.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace pileup
