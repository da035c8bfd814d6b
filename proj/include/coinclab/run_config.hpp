#pragma once

// Run configuration: a flat `key = value` text file with `#` comments.
// Unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coinclab/coincidence.hpp"
#include "coinclab/detector_model.hpp"
#include "coinclab/spdc_sim.hpp"

namespace coinclab {

struct HistogramSpec {
  double half_range = 0.0;
  /// Bin width; empty selects the detector-matched lattice width.
  std::optional<double> bin_width;
};

struct SweepSpec {
  double efficiency_min = 0.30;
  double efficiency_max = 0.95;
  std::size_t efficiency_points = 50;
  double box_time_halfwidth = 10.0;  // ns
  double box_spectral_min = 0.02;  // nm
  double box_spectral_max = 3.0;  // nm
  std::size_t box_points = 150;
  double reference_efficiency = 0.80;
};

struct YGridSpec {
  double lambda_half_range = 3.0;  // nm
  std::size_t lambda_points = 121;
  double dt_half_range = 50.0;  // ns
  std::size_t dt_points = 101;
};

struct RunConfig {
  std::uint64_t seed = 1;
  SimConfig sim;
  DetectorConfig detector;
  /// Target width of the reconstructed pump wavelength for true pairs; used
  /// to calibrate any dispersion left on auto.
  double sum_width_target = 0.36;
  std::optional<double> herald_dispersion;  // nm / pixel; empty = auto
  std::optional<double> signal_dispersion;
  std::optional<double> herald_pixel0;  // nm; empty = centre the span on signal_center
  std::optional<double> signal_pixel0;
  double pairing_window = 200.0;  // ns
  PairingMode pairing_mode = PairingMode::OneToOne;
  HistogramSpec dt_hist{200.0, std::nullopt};
  HistogramSpec lambda_hist{3.0, std::nullopt};
  SweepSpec sweep;
  YGridSpec ygrid;
  /// Pin dT_s0 in the time fit instead of fitting it.
  std::optional<double> pin_time_offset;
  std::string out_dir = "out";
  bool write_events = true;

  /// Applies one key; throws ConfigError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  /// Parses `key = value` lines on top of the current values. `origin`
  /// names the source in error messages.
  void load_text(std::string_view text, std::string_view origin = "<config>");
  void load_file(const std::string& path);

  /// Every key with its current value, one per line, in registry order.
  std::string to_text() const;

  /// Resolves derived settings (dispersion calibration, wavelength origins,
  /// background spans, seeds) and validates. Throws ConfigError.
  RunConfig resolved() const;
  void validate() const;

  /// Histogram edges for dT and reconstructed lambda_p, aligned with the
  /// ToA and pixel lattices unless explicit bin widths are set.
  std::vector<double> dt_edges() const;
  std::vector<double> lambda_edges() const;
};

struct ConfigKeyInfo {
  std::string_view key;
  std::string_view help;
};

const std::vector<ConfigKeyInfo>& config_keys();

/// Reads COINCLAB_SEED if set; throws ConfigError on a malformed value.
std::optional<std::uint64_t> seed_from_environment();

}  // namespace coinclab
