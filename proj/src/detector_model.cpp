#include "coinclab/detector_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "coinclab/errors.hpp"
#include "coinclab/rng.hpp"

namespace coinclab {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("detector config: " + what);
}

double standard_normal(StreamEngine& engine) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine);
}

}  // namespace

DetectionReport& DetectionReport::operator+=(const DetectionReport& o) noexcept {
  input += o.input;
  efficiency_lost += o.efficiency_lost;
  out_of_span += o.out_of_span;
  clamped += o.clamped;
  detected += o.detected;
  return *this;
}

WavelengthSpan DetectorConfig::span(Stripe s) const noexcept {
  const StripeCalibration& cal = stripe(s);
  return {cal.wavelength_at_pixel0 - 0.5 * cal.dispersion,
          cal.wavelength_at_pixel0 + (sensor_width - 0.5) * cal.dispersion};
}

void DetectorConfig::validate() const {
  require(time_jitter_sigma > 0.0, "time_jitter_sigma must be > 0");
  require(toa_quantum >= 0.0, "toa_quantum must be >= 0");
  require(sensor_width > 0 && sensor_height > 0 && sensor_width <= 65535 && sensor_height <= 65535,
          "sensor size out of range");
  for (const auto* cal : {&herald, &signal}) {
    require(cal->dispersion > 0.0, "dispersion must be > 0");
    require(cal->spectral_sigma_px >= 0.0, "spectral sigma must be >= 0");
    require(cal->rows.begin >= 0 && cal->rows.end <= sensor_height && cal->rows.begin < cal->rows.end,
            "stripe rows must be a non-empty range inside the sensor");
  }
  require(!herald.rows.overlaps(signal.rows), "stripe row ranges must be disjoint");
}

std::vector<PhotonEvent> apply_efficiency(std::span<const PhotonEvent> events, double efficiency,
                                          std::uint64_t seed) {
  if (efficiency < 0.0 || efficiency > 1.0) {
    throw DomainError("apply_efficiency: efficiency must lie in [0, 1]");
  }
  std::vector<PhotonEvent> out;
  out.reserve(static_cast<std::size_t>(efficiency * static_cast<double>(events.size())) + 16);
  for (const auto& ev : events) {
    StreamEngine engine(seed, stream_tag::kEfficiency, ev.event_id);
    if (engine.uniform() < efficiency) out.push_back(ev);
  }
  return out;
}

double quantize_toa(double t, double quantum) noexcept {
  if (quantum <= 0.0) return t;
  return std::round(t / quantum) * quantum;
}

double apply_time_jitter(const PhotonEvent& event, double sigma, double quantum,
                         std::uint64_t seed) {
  double t = event.true_time;
  if (sigma > 0.0) {
    StreamEngine engine(seed, stream_tag::kJitter, event.event_id);
    t += sigma * standard_normal(engine);
  }
  return quantize_toa(t, quantum);
}

double pixel_to_wavelength(const DetectorConfig& config, Stripe stripe, int x_pix) {
  const StripeCalibration& cal = config.stripe(stripe);
  return cal.wavelength_at_pixel0 + static_cast<double>(x_pix) * cal.dispersion;
}

PixelHit wavelength_to_pixel(const DetectorConfig& config, Stripe stripe, double lambda,
                             std::uint64_t seed, std::uint64_t event_id) {
  const StripeCalibration& cal = config.stripe(stripe);
  const WavelengthSpan span = config.span(stripe);
  const double tolerance = 5.0 * cal.spectral_sigma_px * cal.dispersion;
  if (lambda < span.lo - tolerance || lambda > span.hi + tolerance) return {};

  double position = (lambda - cal.wavelength_at_pixel0) / cal.dispersion;
  if (cal.spectral_sigma_px > 0.0) {
    StreamEngine engine(seed, stream_tag::kSmear, event_id);
    position += cal.spectral_sigma_px * standard_normal(engine);
  }
  const double x = std::round(position);
  PixelHit hit;
  if (x < 0.0) {
    hit.x_pix = 0;
    hit.clamped = true;
  } else if (x > config.sensor_width - 1) {
    hit.x_pix = config.sensor_width - 1;
    hit.clamped = true;
  } else {
    hit.x_pix = static_cast<int>(x);
  }
  return hit;
}

void detect_unsorted(std::span<const PhotonEvent> truth, const DetectorConfig& config,
                     double efficiency, std::uint64_t seed, DetectionReport& report,
                     std::vector<DetectedEvent>& out) {
  if (efficiency < 0.0 || efficiency > 1.0) {
    throw DomainError("detect: efficiency must lie in [0, 1]");
  }
  for (const auto& ev : truth) {
    ++report.input;
    {
      StreamEngine engine(seed, stream_tag::kEfficiency, ev.event_id);
      if (!(engine.uniform() < efficiency)) {
        ++report.efficiency_lost;
        continue;
      }
    }
    const PixelHit hit = wavelength_to_pixel(config, ev.stripe, ev.true_wavelength, seed, ev.event_id);
    if (!hit.x_pix) {
      ++report.out_of_span;
      continue;
    }
    if (hit.clamped) ++report.clamped;

    const RowRange rows = config.stripe(ev.stripe).rows;
    StreamEngine row_engine(seed, stream_tag::kRow, ev.event_id);
    const auto row_offset = static_cast<int>(row_engine.uniform() * (rows.end - rows.begin));

    DetectedEvent d;
    d.event_id = ev.event_id;
    d.stripe = ev.stripe;
    d.x_pix = static_cast<std::uint16_t>(*hit.x_pix);
    d.y_pix = static_cast<std::uint16_t>(rows.begin + row_offset);
    d.toa = apply_time_jitter(ev, config.time_jitter_sigma, config.toa_quantum, seed);
    d.measured_wavelength = pixel_to_wavelength(config, ev.stripe, *hit.x_pix);
    d.origin = ev.origin;
    d.pair_id = ev.pair_id;
    out.push_back(d);
    ++report.detected;
  }
}

void sort_by_toa(std::vector<DetectedEvent>& events) {
  std::sort(events.begin(), events.end(), toa_order);
}

std::vector<DetectedEvent> detect(std::span<const PhotonEvent> truth, const DetectorConfig& config,
                                  double efficiency, std::uint64_t seed, DetectionReport& report) {
  config.validate();
  std::vector<DetectedEvent> out;
  out.reserve(static_cast<std::size_t>(efficiency * static_cast<double>(truth.size())) + 16);
  detect_unsorted(truth, config, efficiency, seed, report, out);
  sort_by_toa(out);
  return out;
}

double predicted_sum_width(double pump_fwhm, double center, double herald_sigma_px,
                           double signal_sigma_px, double herald_dispersion,
                           double signal_dispersion) {
  // d(lambda_p)/d(lambda_h) = (lambda_s / (lambda_h + lambda_s))^2, and the
  // mirror expression for the signal arm; both 1/4 at degeneracy.
  const double lh = center;
  const double ls = center;
  const double gh = (ls / (lh + ls)) * (ls / (lh + ls));
  const double gs = (lh / (lh + ls)) * (lh / (lh + ls));
  const double pixel_h = (herald_sigma_px * herald_sigma_px + 1.0 / 12.0) * herald_dispersion * herald_dispersion;
  const double pixel_s = (signal_sigma_px * signal_sigma_px + 1.0 / 12.0) * signal_dispersion * signal_dispersion;
  const double sigma_pump = fwhm_to_sigma(pump_fwhm);
  return std::sqrt(sigma_pump * sigma_pump + gh * gh * pixel_h + gs * gs * pixel_s);
}

double calibrate_dispersion(double target_width, double pump_fwhm, double center,
                            double herald_sigma_px, double signal_sigma_px) {
  const auto width = [&](double d) {
    return predicted_sum_width(pump_fwhm, center, herald_sigma_px, signal_sigma_px, d, d);
  };
  if (!(target_width > width(0.0))) {
    throw ConfigError("calibrate_dispersion: pump linewidth alone exceeds the target sum width");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (width(hi) < target_width) {
    hi *= 2.0;
    if (hi > 1e6) throw ConfigError("calibrate_dispersion: no solution (zero pixel resolution?)");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (width(mid) < target_width ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace coinclab
