#pragma once

// End-to-end orchestration: simulate -> detect -> pair -> fit -> discriminant
// -> sweeps -> output files. All stages are deterministic functions of the
// resolved RunConfig; wall-clock timings are kept out of every output file.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coinclab/coincidence.hpp"
#include "coinclab/detector_model.hpp"
#include "coinclab/discriminant.hpp"
#include "coinclab/histfit.hpp"
#include "coinclab/metrics.hpp"
#include "coinclab/run_config.hpp"

namespace coinclab {

/// Wall-clock seconds per stage, in execution order.
struct StageTimings {
  std::vector<std::pair<std::string, double>> stages;

  void add(std::string name, double seconds) { stages.emplace_back(std::move(name), seconds); }
  std::string to_json() const;
};

/// Truth-level tallies of one simulation.
struct GenerationCounts {
  std::uint64_t pairs = 0;  // pairs emitted (2 photons each)
  std::uint64_t herald_thermal = 0;
  std::uint64_t herald_dark = 0;
  std::uint64_t signal_thermal = 0;
  std::uint64_t signal_dark = 0;

  std::uint64_t photons() const noexcept {
    return 2 * pairs + herald_thermal + herald_dark + signal_thermal + signal_dark;
  }
};

struct SimulationResult {
  std::vector<DetectedEvent> events;  // sorted by (toa, event_id), toa normalized
  GenerationCounts generated;
  DetectionReport detection;
};

/// Windowed generation and detection. `config` must be resolved.
SimulationResult simulate(const RunConfig& config, StageTimings* timings = nullptr);

/// Parameters supplied instead of fitting. Either part may be absent.
struct FrozenFits {
  std::optional<TimeFitParams> time;
  std::optional<SpectralFitParams> spectral;

  bool complete() const noexcept { return time && spectral; }
};

/// Reads `{"time": {...}, "spectral": {...}}` or an analysis.json manifest
/// (its "fits" section). Throws IoError / ConfigError.
FrozenFits load_frozen_fits(const std::string& path);

template <class P>
struct FitSummary {
  FitResult<P> result;
  bool frozen = false;
};

struct AnalysisResult {
  std::size_t herald_events = 0;
  std::size_t signal_events = 0;
  bool has_truth = false;
  std::optional<std::uint64_t> generated_pairs;

  std::vector<PairRecord> pairs;
  ClassCounts class_counts;
  Histogram1D dt_hist;
  Histogram1D lambda_hist;
  FitSummary<TimeFitParams> time_fit;
  FitSummary<SpectralFitParams> spectral_fit;
  DiscriminantModel model;

  std::vector<MethodCurve> curves;  // empty without truth
  /// SBR_combined / SBR_other - 1 at the reference efficiency, per method label.
  std::vector<std::pair<std::string, std::optional<double>>> sbr_improvement;
};

/// Pairs, histograms and fits, then (with truth) the four method curves.
/// `events` must be sorted by toa. A failed fit (including a histogram too
/// sparse to fit) writes nothing and throws FitError; use
/// `write_fit_failure_dump` for diagnostics.
AnalysisResult analyze(std::vector<DetectedEvent> events, bool has_truth, const RunConfig& config,
                       const FrozenFits& frozen = {}, std::optional<std::uint64_t> generated_pairs = {},
                       StageTimings* timings = nullptr);

/// Output writers. `dir` is created if missing.
void write_simulation_outputs(const std::string& dir, const RunConfig& config,
                              const SimulationResult& sim);
void write_analysis_outputs(const std::string& dir, const RunConfig& config,
                            const AnalysisResult& analysis);
void write_curves(const std::string& path, const AnalysisResult& analysis);
void write_ygrid(const std::string& path, const RunConfig& config, const DiscriminantModel& model);

/// Fit-failure diagnostics: the dT and lambda_p histograms of the pairs.
void write_fit_failure_dump(const std::string& dir, const RunConfig& config,
                            std::span<const PairRecord> pairs);

// CLI-level operations. `config` is unresolved (as loaded); each resolves it.
void run_simulate(const RunConfig& config, StageTimings* timings = nullptr);
void run_pipeline(const RunConfig& config, const FrozenFits& frozen = {},
                  StageTimings* timings = nullptr);
void run_analyze(const std::string& events_path, const RunConfig& config,
                 const FrozenFits& frozen = {}, StageTimings* timings = nullptr);
/// Writes curves.csv only.
void run_sweep(const std::string& events_path, const RunConfig& config,
               const FrozenFits& frozen = {}, StageTimings* timings = nullptr);
/// Writes ygrid.csv. With complete frozen fits no events file is needed
/// (pass an empty path).
void run_ygrid(const std::string& events_path, const RunConfig& config,
               const FrozenFits& frozen = {}, StageTimings* timings = nullptr);

}  // namespace coinclab
