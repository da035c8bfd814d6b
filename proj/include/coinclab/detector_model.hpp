#pragma once

// Camera response: quantum-efficiency thinning, ToA jitter and quantization,
// spectral smearing onto integer pixel columns of the two stripes.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "coinclab/spdc_sim.hpp"

namespace coinclab {

/// Half-open pixel-row interval [begin, end).
struct RowRange {
  int begin = 0;
  int end = 0;

  bool contains(int y) const noexcept { return y >= begin && y < end; }
  bool overlaps(const RowRange& o) const noexcept { return begin < o.end && o.begin < end; }
};

struct StripeCalibration {
  double wavelength_at_pixel0 = 0.0;  // nm
  double dispersion = 0.0;  // nm / pixel
  double spectral_sigma_px = 0.0;
  RowRange rows;
};

struct DetectorConfig {
  double time_jitter_sigma = 5.338539;  // ns, per photon
  double toa_quantum = 1.5625;  // ns
  StripeCalibration herald{773.84, 0.2825, 1.6, {60, 80}};
  StripeCalibration signal{773.84, 0.2825, 3.2, {170, 190}};
  int sensor_width = 256;
  int sensor_height = 256;
  /// Constant ToT written to the events file; cluster energies are not modelled.
  int tot_placeholder = 0;

  const StripeCalibration& stripe(Stripe s) const noexcept {
    return s == Stripe::Herald ? herald : signal;
  }
  /// Wavelengths covered by the stripe's pixel columns (outer pixel edges).
  WavelengthSpan span(Stripe s) const noexcept;

  void validate() const;
};

// Field order keeps the struct at 48 bytes; runs hold tens of millions.
struct DetectedEvent {
  std::uint64_t event_id = 0;
  double toa = 0.0;  // ns, quantized
  double measured_wavelength = 0.0;  // nm
  std::optional<std::uint64_t> pair_id;
  std::uint16_t x_pix = 0;
  std::uint16_t y_pix = 0;
  Stripe stripe = Stripe::Herald;
  std::optional<OriginTag> origin;
};

/// Stage tallies. Conservation: input == efficiency_lost + out_of_span + detected.
struct DetectionReport {
  std::uint64_t input = 0;
  std::uint64_t efficiency_lost = 0;
  std::uint64_t out_of_span = 0;
  std::uint64_t clamped = 0;
  std::uint64_t detected = 0;

  DetectionReport& operator+=(const DetectionReport& o) noexcept;
};

/// Keeps each event independently with probability `efficiency`; the draw for
/// an event depends only on (seed, event_id).
std::vector<PhotonEvent> apply_efficiency(std::span<const PhotonEvent> events, double efficiency,
                                          std::uint64_t seed);

/// Rounds to the nearest multiple of `quantum` (no rounding when quantum <= 0).
double quantize_toa(double t, double quantum) noexcept;

/// Jittered, quantized arrival time of one photon. sigma = 0 is the
/// noiseless limit.
double apply_time_jitter(const PhotonEvent& event, double sigma, double quantum,
                         std::uint64_t seed);

double pixel_to_wavelength(const DetectorConfig& config, Stripe stripe, int x_pix);

struct PixelHit {
  std::optional<int> x_pix;  // empty: dropped as out of span
  bool clamped = false;
};

/// Smeared pixel column for a photon of wavelength `lambda`. Photons more
/// than 5 sigma outside the stripe span are dropped; smeared positions past
/// the sensor edge are clamped.
PixelHit wavelength_to_pixel(const DetectorConfig& config, Stripe stripe, double lambda,
                             std::uint64_t seed, std::uint64_t event_id);

/// Full camera response. Output sorted by (toa, event_id).
std::vector<DetectedEvent> detect(std::span<const PhotonEvent> truth, const DetectorConfig& config,
                                  double efficiency, std::uint64_t seed, DetectionReport& report);

/// Detection without the final sort; `out` is appended to. Used for windowed
/// processing where the caller sorts and merges windows itself.
void detect_unsorted(std::span<const PhotonEvent> truth, const DetectorConfig& config,
                     double efficiency, std::uint64_t seed, DetectionReport& report,
                     std::vector<DetectedEvent>& out);

/// Strict weak order by (toa, event_id); the canonical event order.
inline bool toa_order(const DetectedEvent& a, const DetectedEvent& b) noexcept {
  if (a.toa != b.toa) return a.toa < b.toa;
  return a.event_id < b.event_id;
}

void sort_by_toa(std::vector<DetectedEvent>& events);

/// Width of the reconstructed pump wavelength for true pairs, from the pump
/// linewidth, per-arm pixel resolution and pixel quantization, linearized at
/// the degenerate point (center, center).
double predicted_sum_width(double pump_fwhm, double center, double herald_sigma_px,
                           double signal_sigma_px, double herald_dispersion,
                           double signal_dispersion);

/// Common dispersion (nm/pixel) giving `target_width` for the reconstructed
/// pump wavelength. Throws ConfigError when the pump linewidth alone already
/// exceeds the target.
double calibrate_dispersion(double target_width, double pump_fwhm, double center,
                            double herald_sigma_px, double signal_sigma_px);

}  // namespace coinclab
