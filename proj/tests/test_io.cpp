#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "pileup/io.hpp"
#include "pileup/simulate.hpp"

using namespace pileup;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pileup_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

} // namespace

TEST_CASE("cycle csv round-trips bit-exactly with its metadata") {
  TempDir dir;
  MarkModel m = MarkModel::bimodal();
  CycleSet cs = simulate_cycles(0.04, m, StopRule::num_cycles(500), 211);

  const fs::path csv = dir.path / "cycles.csv";
  write_cycles_csv(cs, csv);
  write_cycles_metadata(cs, json::object(), fs::path(csv.string() + ".json"));

  CycleSet back = read_cycles_csv(csv);
  REQUIRE(back.size() == cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(back.cycles[i].idle == cs.cycles[i].idle);
    CHECK(back.cycles[i].duration == cs.cycles[i].duration);
    CHECK(back.cycles[i].energy == cs.cycles[i].energy);
  }
  CHECK(back.seed == cs.seed);
  REQUIRE(back.lambda_true.has_value());
  CHECK(*back.lambda_true == 0.04);
  CHECK(back.model_description == cs.model_description);
}

TEST_CASE("corrupt csv rows name the offending line") {
  TempDir dir;
  const fs::path csv = dir.path / "bad.csv";
  {
    std::ofstream out(csv);
    out << "idle,duration,energy\n1.0,2.0,3.0\n1.0,oops,3.0\n";
  }
  try {
    read_cycles_csv(csv);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  const fs::path neg = dir.path / "neg.csv";
  {
    std::ofstream out(neg);
    out << "idle,duration,energy\n-1.0,2.0,3.0\n";
  }
  CHECK_THROWS_AS(read_cycles_csv(neg), Error);

  const fs::path empty = dir.path / "empty.csv";
  {
    std::ofstream out(empty);
    out << "idle,duration,energy\n";
  }
  try {
    read_cycles_csv(empty);
    FAIL("expected EMPTY_STREAM");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyStream);
  }
}

TEST_CASE("tabulated density csv loads and renormalizes") {
  TempDir dir;
  const fs::path csv = dir.path / "density.csv";
  {
    std::ofstream out(csv);
    out << "y,density\n0,0\n1,2\n2,0\n";
  }
  TabulatedDensity d = read_density_csv(csv);
  CHECK(d.pdf(1.0) == doctest::Approx(1.0));

  const fs::path bad = dir.path / "nonmono.csv";
  {
    std::ofstream out(bad);
    out << "y,density\n0,1\n0,1\n";
  }
  CHECK_THROWS_AS(read_density_csv(bad), Error);
}

TEST_CASE("full precision formatting survives the round trip") {
  for (double v : {1.0 / 3.0, 2.5e-312, 1.7976931348623157e308, 0.04}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("config hash is stable and sensitive") {
  json a = {{"lambda", 0.04}, {"seed", 7}};
  json b = {{"lambda", 0.04}, {"seed", 8}};
  CHECK(config_hash(a) == config_hash(a));
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("spectrum csv matches the estimate grid") {
  TempDir dir;
  DensityEstimate est;
  est.y = {0.0, 1.0, 2.0};
  est.m_hat = {0.25, 0.5, 0.25};
  const fs::path csv = dir.path / "spectrum.csv";
  write_spectrum_csv(est, csv);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "y,m_hat");
  std::getline(in, line);
  CHECK(line == "0,0.25");
}
