#pragma once

// Truth-level photon generation: correlated down-conversion pairs plus
// uncorrelated background on the herald and signal spectrometer stripes.

#include <cstdint>
#include <optional>
#include <vector>

namespace coinclab {

enum class Stripe : std::uint8_t { Herald, Signal };

enum class OriginTag : std::uint8_t { SourcePair, Thermal, DarkCount };

/// Wavelength support of a stripe, in nm.
struct WavelengthSpan {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double lambda) const noexcept { return lambda >= lo && lambda <= hi; }
};

/// Background on one stripe. Rates are truth-level photons per second, i.e.
/// before the detector's quantum-efficiency thinning.
struct StripeBackground {
  double thermal_rate = 0.0;
  double dark_rate = 0.0;
  /// Spectral tilt of the jamming light: density ~ 1 + slope*u, u in [-1, 1]
  /// across the span. 0 is flat; |slope| <= 1.
  double slope = 0.0;

  double total_rate() const noexcept { return thermal_rate + dark_rate; }
};

// Defaults are a calibrated operating point: signal-heavy jamming light with
// a weak herald background, so the random-coincidence plane is locally flat
// around the true-pair peak, at rates low enough that pairing does not bias
// the true-pair dT width.
struct SimConfig {
  double pair_rate = 5.0e5;  // pairs / s
  StripeBackground herald_background{1.0e5, 1.0e5, 0.0};
  StripeBackground signal_background{2.4e6, 1.0e5, 0.0};
  double duration = 10.0;  // s
  double pump_center = 405.0;  // nm
  double pump_fwhm = 0.6;  // nm
  double signal_center = 810.0;  // nm, centre of both daughter marginals
  double herald_marginal_sigma = 8.0;  // nm
  /// Mean of ToA_herald - ToA_signal for true pairs, in ns.
  double pair_time_offset = 0.0;
  double quantum_efficiency = 0.2;
  std::uint64_t rng_seed = 1;
  /// Length of the independent generation windows, in s. Part of the
  /// reproducibility contract: changing it changes the random streams.
  double window = 0.01;
  WavelengthSpan herald_span{774.0, 846.0};
  WavelengthSpan signal_span{774.0, 846.0};

  double herald_background_rate() const noexcept { return herald_background.total_rate(); }
  double signal_background_rate() const noexcept { return signal_background.total_rate(); }
  const StripeBackground& background(Stripe s) const noexcept {
    return s == Stripe::Herald ? herald_background : signal_background;
  }
  const WavelengthSpan& span(Stripe s) const noexcept {
    return s == Stripe::Herald ? herald_span : signal_span;
  }

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

struct PhotonEvent {
  std::uint64_t event_id = 0;
  Stripe stripe = Stripe::Herald;
  OriginTag origin = OriginTag::Thermal;
  double true_wavelength = 0.0;  // nm
  double true_time = 0.0;  // ns
  std::optional<std::uint64_t> pair_id;
};

double fwhm_to_sigma(double fwhm) noexcept;

/// Energy conservation solved for the signal wavelength:
/// lambda_h * lambda_p / (lambda_h - lambda_p). Throws DomainError unless
/// lambda_h > lambda_p > 0.
double signal_wavelength(double pump, double herald);

/// Inverse of signal_wavelength: lambda_h * lambda_s / (lambda_h + lambda_s).
double reconstruct_pump_wavelength(double herald, double signal);

// Event ids are interleaved by stream so independently generated streams
// never collide: pair k -> 4k (herald), 4k+1 (signal); the j-th background
// photon on the herald/signal stripe -> 4j+2 / 4j+3.
inline constexpr std::uint64_t herald_pair_event_id(std::uint64_t k) noexcept { return 4 * k; }
inline constexpr std::uint64_t signal_pair_event_id(std::uint64_t k) noexcept { return 4 * k + 1; }
inline constexpr std::uint64_t background_event_id(Stripe s, std::uint64_t j) noexcept {
  return 4 * j + (s == Stripe::Herald ? 2 : 3);
}

/// Running per-stream indices, so windows can be generated one at a time
/// while ids stay identical to a single-shot generation.
struct GenerationCursor {
  std::uint64_t next_pair = 0;
  std::uint64_t next_herald_background = 0;
  std::uint64_t next_signal_background = 0;
};

std::size_t window_count(const SimConfig& config);

/// Pairs emitted in window `w`, in emission order.
std::vector<PhotonEvent> generate_pairs_window(const SimConfig& config, std::size_t w,
                                               GenerationCursor& cursor);
/// Background photons of both stripes in window `w`.
std::vector<PhotonEvent> generate_background_window(const SimConfig& config, std::size_t w,
                                                    GenerationCursor& cursor);

std::vector<PhotonEvent> generate_pairs(const SimConfig& config);
std::vector<PhotonEvent> generate_background(const SimConfig& config);

/// Concatenate and sort by (true_time, event_id). Throws Error on a
/// duplicate event_id.
std::vector<PhotonEvent> merge_streams(std::vector<std::vector<PhotonEvent>> streams);

}  // namespace coinclab
