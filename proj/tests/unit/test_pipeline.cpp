#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "coinclab/errors.hpp"
#include "coinclab/event_io.hpp"
#include "coinclab/pipeline.hpp"
#include "oracles.hpp"

using namespace coinclab;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& out_dir, double duration = 0.3) {
  RunConfig c;
  c.set("sim.duration", std::to_string(duration));
  c.set("seed", "5");
  c.out_dir = out_dir;
  return c;
}

}  // namespace

TEST_CASE("simulate: generated counts, QE thinning and bookkeeping") {
  RunConfig c = small_config("unused", 1.0);
  const RunConfig r = c.resolved();
  const auto sim = simulate(r);
  const SimConfig& s = r.sim;
  const auto& g = sim.generated;
  const double T = s.duration;
  CHECK(oracle::within_sigma(double(g.pairs), s.pair_rate * T, s.pair_rate * T));
  CHECK(oracle::within_sigma(double(g.herald_thermal), s.herald_background.thermal_rate * T,
                             s.herald_background.thermal_rate * T));
  CHECK(oracle::within_sigma(double(g.signal_thermal), s.signal_background.thermal_rate * T,
                             s.signal_background.thermal_rate * T));
  CHECK(oracle::within_sigma(double(g.signal_dark), s.signal_background.dark_rate * T,
                             s.signal_background.dark_rate * T));

  const auto& d = sim.detection;
  CHECK(d.input == g.photons());
  CHECK(d.input == d.efficiency_lost + d.out_of_span + d.detected);
  CHECK(d.detected == sim.events.size());
  const double q = s.quantum_efficiency;
  CHECK(oracle::within_sigma(double(d.detected + d.out_of_span), q * double(d.input),
                             q * (1.0 - q) * double(d.input)));

  CHECK(std::is_sorted(sim.events.begin(), sim.events.end(), toa_order));
  for (const auto& e : sim.events) {
    REQUIRE(e.toa == normalize_toa(e.toa));
    REQUIRE(e.toa >= -100.0);
  }
}

TEST_CASE("pipeline writes every output and analyze reproduces it") {
  const auto dir = oracle::scratch_dir("pipeline");
  const RunConfig c = small_config(dir.string());
  run_pipeline(c);
  for (const char* f : {"events.csv", "simulation.json", "pairs.csv", "hist_delta_t.csv", "hist_lambda_p.csv",
                        "hist2d.csv", "curves.csv", "ygrid.csv", "analysis.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }

  const RunConfig r = c.resolved();
  auto sim = simulate(r);
  const auto a = analyze(sim.events, true, r, {}, sim.generated.pairs);
  CHECK(a.curves.size() == 4);
  CHECK(a.herald_events + a.signal_events == sim.events.size());
  CHECK(a.time_fit.result.params.sigma == doctest::Approx(7.55).epsilon(0.15));

  // Analyzing the written events file gives the same pairs, byte for byte.
  const auto dir2 = oracle::scratch_dir("pipeline_analyze");
  RunConfig c2 = c;
  c2.out_dir = dir2.string();
  run_analyze((dir / "events.csv").string(), c2);
  for (const char* f : {"pairs.csv", "hist_delta_t.csv", "hist_lambda_p.csv", "hist2d.csv", "curves.csv",
                        "ygrid.csv"}) {
    CHECK_MESSAGE(oracle::read_file(dir / f) == oracle::read_file(dir2 / f), f);
  }

  // Frozen fits from the manifest reproduce the model exactly.
  const auto frozen = load_frozen_fits((dir / "analysis.json").string());
  REQUIRE(frozen.complete());
  CHECK(frozen.time->sigma == a.time_fit.result.params.sigma);
  CHECK(frozen.spectral->sigma == a.spectral_fit.result.params.sigma);
  const auto af = analyze(sim.events, true, r, frozen, sim.generated.pairs);
  CHECK(af.time_fit.frozen);
  CHECK(af.spectral_fit.frozen);
  CHECK(af.curves[0].points.back().outcome.s == a.curves[0].points.back().outcome.s);

  // A Y grid needs no events once both fits are frozen.
  const auto dir3 = oracle::scratch_dir("pipeline_ygrid");
  RunConfig c3 = c;
  c3.out_dir = dir3.string();
  run_ygrid("", c3, frozen);
  CHECK(oracle::read_file(dir3 / "ygrid.csv") == oracle::read_file(dir / "ygrid.csv"));
  CHECK_THROWS_AS(run_ygrid("", c3, FrozenFits{frozen.time, std::nullopt}), ConfigError);
}

TEST_CASE("analysis without truth tags") {
  const auto dir = oracle::scratch_dir("pipeline_notruth");
  const RunConfig r = small_config(dir.string()).resolved();
  auto sim = simulate(r);
  for (auto& e : sim.events) {
    e.origin.reset();
    e.pair_id.reset();
  }
  write_events_file((dir / "stripped.csv").string(), sim.events, 0);
  CHECK(oracle::read_file(dir / "stripped.csv").starts_with(std::string(kEventsHeader) + "\n"));
  run_analyze((dir / "stripped.csv").string(), small_config(dir.string()));
  CHECK_FALSE(fs::exists(dir / "curves.csv"));
  CHECK(fs::exists(dir / "ygrid.csv"));
  CHECK(fs::exists(dir / "analysis.json"));
  CHECK(oracle::read_file(dir / "pairs.csv").find(",TC") == std::string::npos);
  CHECK_THROWS_AS(run_sweep((dir / "stripped.csv").string(), small_config(dir.string())), IoError);
}

TEST_CASE("zero rates give a header-only events file; fitting it fails") {
  const auto dir = oracle::scratch_dir("pipeline_empty");
  RunConfig c = small_config(dir.string(), 0.05);
  for (const char* k : {"sim.pair_rate", "sim.herald_thermal_rate", "sim.herald_dark_rate", "sim.signal_thermal_rate",
                        "sim.signal_dark_rate"}) {
    c.set(k, "0");
  }
  run_simulate(c);
  CHECK(oracle::read_file(dir / "events.csv") == std::string(kEventsHeader) + "\n");
  try {
    run_analyze((dir / "events.csv").string(), c);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).ends_with(": no events"));
  }
}

TEST_CASE("a failed fit dumps histograms and throws FitError") {
  const auto dir = oracle::scratch_dir("pipeline_fitfail");
  RunConfig c = small_config(dir.string(), 0.02);
  c.set("sim.pair_rate", "0");
  c.set("sim.signal_thermal_rate", "1e4");
  run_simulate(c);
  CHECK_THROWS_AS(run_analyze((dir / "events.csv").string(), c), FitError);
  CHECK(fs::exists(dir / "fit_failure_hist_delta_t.csv"));
  CHECK(fs::exists(dir / "fit_failure_hist_lambda_p.csv"));
  CHECK_FALSE(fs::exists(dir / "analysis.json"));
}

TEST_CASE("stage timings") {
  StageTimings t;
  const RunConfig r = small_config("unused", 0.02).resolved();
  (void)simulate(r, &t);
  REQUIRE(t.stages.size() == 1);
  CHECK(t.stages[0].first == "simulate");
  CHECK(t.to_json().find("\"simulate\"") != std::string::npos);
}
