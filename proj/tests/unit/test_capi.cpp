#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "coinclab/coinclab.h"

namespace fs = std::filesystem;

namespace {

struct Config {
  coinclab_config* p = nullptr;
  Config() { REQUIRE(coinclab_config_create(&p) == COINCLAB_OK); }
  ~Config() { coinclab_config_destroy(p); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
};

std::string get(const coinclab_config* c, const char* key) {
  std::size_t needed = 0;
  REQUIRE(coinclab_config_get(c, key, nullptr, 0, &needed) == COINCLAB_OK);
  std::string buf(needed, '\0');
  REQUIRE(coinclab_config_get(c, key, buf.data(), buf.size(), &needed) == COINCLAB_OK);
  buf.resize(needed - 1);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("coinclab_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("version and key registry") {
  CHECK(std::string(coinclab_version()) == "0.3.0");
  const std::size_t n = coinclab_config_key_count();
  REQUIRE(n > 10);
  CHECK(std::string(coinclab_config_key_name(0)) == "seed");
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(coinclab_config_key_name(i) != nullptr);
    CHECK(std::string(coinclab_config_key_help(i)).size() > 0);
  }
  CHECK(coinclab_config_key_name(n) == nullptr);
}

TEST_CASE("config handle: set, get, clone, errors") {
  Config c;
  CHECK(coinclab_config_set(c.p, "sim.duration", "2.5") == COINCLAB_OK);
  CHECK(get(c.p, "sim.duration") == "2.5");
  CHECK(get(c.p, "det.herald_dispersion") == "auto");

  char small[2];
  std::size_t needed = 0;
  CHECK(coinclab_config_get(c.p, "sim.duration", small, sizeof small, &needed) != COINCLAB_OK);
  CHECK(needed == 4);

  CHECK(coinclab_config_set(c.p, "no.such.key", "1") == COINCLAB_ERR_CONFIG);
  CHECK(std::string(coinclab_last_error()).find("no.such.key") != std::string::npos);
  CHECK(coinclab_config_set(c.p, "sim.duration", "soon") == COINCLAB_ERR_CONFIG);
  CHECK(coinclab_config_load_text(c.p, "seed = 4\nbad line\n") == COINCLAB_ERR_CONFIG);
  CHECK(std::string(coinclab_last_error()).find(":2:") != std::string::npos);
  CHECK(coinclab_config_load_file(c.p, "/nonexistent/file.cfg") == COINCLAB_ERR_CONFIG);

  coinclab_config* copy = nullptr;
  REQUIRE(coinclab_config_clone(c.p, &copy) == COINCLAB_OK);
  CHECK(coinclab_config_set(copy, "sim.duration", "7") == COINCLAB_OK);
  CHECK(get(c.p, "sim.duration") == "2.5");
  coinclab_config_destroy(copy);

  CHECK(coinclab_config_validate(c.p) == COINCLAB_OK);
  CHECK(coinclab_config_set(c.p, "sim.quantum_efficiency", "1.5") == COINCLAB_OK);
  CHECK(coinclab_config_validate(c.p) == COINCLAB_ERR_CONFIG);

  CHECK(coinclab_config_create(nullptr) != COINCLAB_OK);
  CHECK(coinclab_config_set(nullptr, "seed", "1") != COINCLAB_OK);
}

TEST_CASE("COINCLAB_SEED through the handle") {
  Config c;
  ::setenv("COINCLAB_SEED", "99", 1);
  CHECK(coinclab_config_apply_environment(c.p) == COINCLAB_OK);
  CHECK(get(c.p, "seed") == "99");
  ::setenv("COINCLAB_SEED", "9x", 1);
  CHECK(coinclab_config_apply_environment(c.p) == COINCLAB_ERR_CONFIG);
  ::unsetenv("COINCLAB_SEED");
}

TEST_CASE("formulas") {
  double v = 0.0;
  CHECK(coinclab_signal_wavelength(405.0, 810.0, &v) == COINCLAB_OK);
  CHECK(v == doctest::Approx(810.0));
  CHECK(coinclab_signal_wavelength(405.0, 400.0, &v) == COINCLAB_ERR_DOMAIN);
  CHECK(coinclab_reconstruct_pump_wavelength(810.0, 810.0, &v) == COINCLAB_OK);
  CHECK(v == doctest::Approx(405.0));
  CHECK(coinclab_reconstruct_pump_wavelength(-1.0, 810.0, &v) == COINCLAB_ERR_DOMAIN);
  CHECK(coinclab_snr_from_sbr_change(10.0, 5.0, 2.0, &v) == COINCLAB_OK);
  CHECK(v == doctest::Approx(1.0));
  CHECK(coinclab_photons_required_ratio(2.0, &v) == COINCLAB_OK);
  CHECK(v == doctest::Approx(0.25));
  CHECK(coinclab_photons_required_ratio(0.0, &v) == COINCLAB_ERR_DOMAIN);
  CHECK(coinclab_background_ratio_for_snr_gain(1.26, 1.07, &v) == COINCLAB_OK);
  CHECK(v == doctest::Approx(1.588).epsilon(0.01));
  CHECK(coinclab_photons_required_ratio(2.0, nullptr) != COINCLAB_OK);
}

TEST_CASE("runs through the shared library") {
  const auto dir = scratch("runs");
  Config c;
  REQUIRE(coinclab_config_set(c.p, "sim.duration", "0.3") == COINCLAB_OK);
  REQUIRE(coinclab_config_set(c.p, "out.dir", dir.string().c_str()) == COINCLAB_OK);
  REQUIRE(coinclab_run_pipeline(c.p, nullptr) == COINCLAB_OK);
  CHECK(fs::exists(dir / "curves.csv"));
  const std::string timings = coinclab_last_timings();
  CHECK(timings.find("\"simulate\"") != std::string::npos);
  CHECK(timings.find("\"fits\"") != std::string::npos);

  const auto ydir = scratch("ygrid");
  REQUIRE(coinclab_config_set(c.p, "out.dir", ydir.string().c_str()) == COINCLAB_OK);
  CHECK(coinclab_run_ygrid(c.p, nullptr, (dir / "analysis.json").string().c_str()) == COINCLAB_OK);
  CHECK(fs::exists(ydir / "ygrid.csv"));
  CHECK(coinclab_run_ygrid(c.p, nullptr, nullptr) == COINCLAB_ERR_CONFIG);
  CHECK(coinclab_run_analyze(c.p, (dir / "missing.csv").string().c_str(), nullptr) == COINCLAB_ERR_IO);
  CHECK(coinclab_run_sweep(c.p, (dir / "events.csv").string().c_str(), nullptr) == COINCLAB_OK);
  CHECK(fs::exists(ydir / "curves.csv"));
}
