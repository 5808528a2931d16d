#include "cryocav/config.hpp"
#include "cryocav/csv_io.hpp"
#include "cryocav/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cryocav;
namespace fs = std::filesystem;

namespace {

fs::path fresh(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cryocav_pipeline_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig short_config() {
  return parse_config(R"(
[run]
duration_s = 1
[cavity]
wavelength_nm = 780
finesse = 110
mode_number = 13
[fit]
trials = 8
)");
}

bool has_key(const std::string& summary, const std::string& key) {
  return summary.find("\n" + key + " = ") != std::string::npos || summary.rfind(key + " = ", 0) == 0;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("unknown command") {
  const auto r = run("frobnicate", {}, {});
  CHECK(r.exit_code == 1);
  CHECK(r.error.find("unknown command") != std::string::npos);
  CHECK(r.summary.find("usage") != std::string::npos);
}

TEST_CASE("report carries the headline numbers") {
  RunOptions o;
  o.out_dir = fresh("report");
  const auto r = run("report", short_config(), o);
  REQUIRE(r.exit_code == 0);
  for (const char* key : {"unlocked_rms_m", "locked_rms_m", "reduction_percent", "cold_plate_rms_m", "rms_ratio"})
    CHECK(has_key(r.summary, key));
  CHECK(fs::exists(o.out_dir / "summary.txt"));
  CHECK(slurp(o.out_dir / "summary.txt").rfind("# cryocav ", 0) == 0);
}

TEST_CASE("missing sections and inputs are validation failures") {
  const auto r = run("report", RunConfig{}, {.out_dir = fresh("missing")});
  CHECK(r.exit_code == 1);
  CHECK(r.error.find("[cavity]") != std::string::npos);
  CHECK(run("analyze", short_config(), {.out_dir = fresh("missing")}).exit_code == 1);
}

TEST_CASE("instability maps to exit 2") {
  auto c = short_config();
  c.lock.kp = 200;
  c.sections.insert("lock");
  const auto r = run("lock", c, {.out_dir = fresh("unstable")});
  CHECK(r.exit_code == 2);
  CHECK(r.error.rfind("error: numerical:", 0) == 0);
}

TEST_CASE("synth, convert, analyze chain") {
  const auto dir = fresh("chain");
  auto c = short_config();
  REQUIRE(run("synth", c, {.out_dir = dir}).exit_code == 0);
  c.io.input = "cavity_length.csv";
  c.sections.insert("io");
  REQUIRE(run("convert", c, {.out_dir = dir / "conv", .base_dir = dir}).exit_code == 0);
  const auto t = read_timeseries(dir / "conv" / "transmission.csv");
  CHECK(t.unit() == Unit::Transmission);

  c.io.input = "conv/transmission.csv";
  const auto a = run("analyze", c, {.out_dir = dir / "an", .base_dir = dir});
  REQUIRE(a.exit_code == 0);
  CHECK(has_key(a.summary, "rms_m"));
  CHECK(fs::exists(dir / "an" / "spectrum.csv"));
  CHECK(fs::exists(dir / "an" / "histogram.csv"));
  CHECK(fs::exists(dir / "an" / "rms_vs_bandwidth.csv"));
}

TEST_CASE("Monte-Carlo results do not depend on the worker count") {
  const auto c = short_config();
  for (const char* cmd : {"fit-finesse", "fit-polariton"}) {
    const auto a = run(cmd, c, {.out_dir = fresh("mc1"), .parallel = 1});
    const auto b = run(cmd, c, {.out_dir = fresh("mc4"), .parallel = 4});
    REQUIRE(a.exit_code == 0);
    CHECK(a.summary == b.summary);
  }
}

TEST_CASE("seed override changes the output and is recorded") {
  const auto c = short_config();
  const auto a = run("synth", c, {.out_dir = fresh("s1")});
  const auto dir = fresh("s2");
  const auto b = run("synth", c, {.out_dir = dir, .seed = 99});
  CHECK(a.summary != b.summary);
  CHECK(slurp(dir / "summary.txt").find("# seed: 99") != std::string::npos);
}

TEST_CASE("default configuration lands in the locked rms and excursion corridors") {
  RunOptions o;
  o.out_dir = fresh("default");
  const auto r = run("report", parse_config(slurp(CRYOCAV_DEFAULT_CONFIG)), o);
  REQUIRE(r.exit_code == 0);
  auto value = [&](const std::string& key) {
    const auto at = r.summary.find("\n" + key + " = ");
    REQUIRE(at != std::string::npos);
    return std::stod(r.summary.substr(at + key.size() + 4));
  };
  CHECK(value("locked_rms_m") == doctest::Approx(89e-12).epsilon(0.20));
  CHECK(value("unlocked_pp_m") == doctest::Approx(0.7e-9).epsilon(0.30));
}

}
