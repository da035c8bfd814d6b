#include "coinclab/spdc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "coinclab/errors.hpp"
#include "coinclab/rng.hpp"

namespace coinclab {

namespace {

constexpr double kNsPerSecond = 1.0e9;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("simulation config: " + what);
}

struct WindowBounds {
  double begin_ns;
  double end_ns;
};

WindowBounds window_bounds(const SimConfig& config, std::size_t w) {
  const double begin = static_cast<double>(w) * config.window;
  const double end = std::min(begin + config.window, config.duration);
  return {begin * kNsPerSecond, end * kNsPerSecond};
}

// Inverse CDF of the density 1 + slope*u on u in [-1, 1].
double sample_tilted(double slope, double r) {
  if (std::abs(slope) < 1e-12) return 2.0 * r - 1.0;
  const double disc = (1.0 - slope) * (1.0 - slope) + 4.0 * slope * r;
  return (-1.0 + std::sqrt(std::max(disc, 0.0))) / slope;
}

void generate_stripe_background(const SimConfig& config, Stripe stripe, std::size_t w,
                                std::uint64_t& next_index, std::vector<PhotonEvent>& out) {
  const StripeBackground& bg = config.background(stripe);
  const double rate = bg.total_rate() / kNsPerSecond;
  if (rate <= 0.0) return;
  const auto tag = stripe == Stripe::Herald ? stream_tag::kHeraldBackground
                                            : stream_tag::kSignalBackground;
  StreamEngine engine(config.rng_seed, tag, w);
  const double dark_fraction = bg.dark_rate / bg.total_rate();
  const WavelengthSpan& span = config.span(stripe);
  const double mid = 0.5 * (span.lo + span.hi);
  const double half = 0.5 * span.width();

  const auto [begin, end] = window_bounds(config, w);
  double t = begin;
  for (;;) {
    t += -std::log1p(-engine.uniform()) / rate;
    if (t >= end) break;
    PhotonEvent ev;
    ev.event_id = background_event_id(stripe, next_index++);
    ev.stripe = stripe;
    ev.origin = engine.uniform() < dark_fraction ? OriginTag::DarkCount : OriginTag::Thermal;
    ev.true_wavelength = mid + half * sample_tilted(bg.slope, engine.uniform());
    ev.true_time = t;
    out.push_back(ev);
  }
}

}  // namespace

void SimConfig::validate() const {
  require(pair_rate >= 0.0, "pair_rate must be >= 0");
  require(herald_background.thermal_rate >= 0.0 && herald_background.dark_rate >= 0.0,
          "herald background rates must be >= 0");
  require(signal_background.thermal_rate >= 0.0 && signal_background.dark_rate >= 0.0,
          "signal background rates must be >= 0");
  require(std::abs(herald_background.slope) <= 1.0 && std::abs(signal_background.slope) <= 1.0,
          "background slope must lie in [-1, 1]");
  require(duration > 0.0, "duration must be > 0");
  require(window > 0.0, "window must be > 0");
  require(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0,
          "quantum_efficiency must lie in [0, 1]");
  require(pump_fwhm > 0.0, "pump_fwhm must be > 0");
  require(pump_center > 0.0, "pump_center must be > 0");
  require(pump_center < signal_center, "pump_center must be below signal_center");
  require(herald_marginal_sigma >= 0.0, "herald_marginal_sigma must be >= 0");
  require(herald_span.hi > herald_span.lo && signal_span.hi > signal_span.lo,
          "stripe wavelength spans must be non-empty");
  require(herald_span.lo > pump_center && signal_span.lo > pump_center,
          "stripe wavelength spans must lie above the pump wavelength");
}

double fwhm_to_sigma(double fwhm) noexcept {
  return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

double signal_wavelength(double pump, double herald) {
  if (!(pump > 0.0) || !(herald > pump)) {
    throw DomainError("signal_wavelength: requires herald > pump > 0");
  }
  return herald * pump / (herald - pump);
}

double reconstruct_pump_wavelength(double herald, double signal) {
  if (!(herald > 0.0) || !(signal > 0.0)) {
    throw DomainError("reconstruct_pump_wavelength: wavelengths must be positive");
  }
  return herald * signal / (herald + signal);
}

std::size_t window_count(const SimConfig& config) {
  return static_cast<std::size_t>(std::ceil(config.duration / config.window - 1e-12));
}

std::vector<PhotonEvent> generate_pairs_window(const SimConfig& config, std::size_t w,
                                               GenerationCursor& cursor) {
  std::vector<PhotonEvent> out;
  const double rate = config.pair_rate / kNsPerSecond;
  if (rate <= 0.0) return out;

  StreamEngine engine(config.rng_seed, stream_tag::kPairs, w);
  std::normal_distribution<double> pump(config.pump_center, fwhm_to_sigma(config.pump_fwhm));
  std::normal_distribution<double> herald(config.signal_center, config.herald_marginal_sigma);
  const double duration_ns = config.duration * kNsPerSecond;

  const auto [begin, end] = window_bounds(config, w);
  out.reserve(static_cast<std::size_t>(2.2 * rate * (end - begin)) + 16);
  double t = begin;
  for (;;) {
    t += -std::log1p(-engine.uniform()) / rate;
    if (t >= end) break;
    const double lambda_p = pump(engine);
    const double lambda_h = config.herald_marginal_sigma > 0.0 ? herald(engine)
                                                               : config.signal_center;
    const double t_signal = t - config.pair_time_offset;
    // Both photons must land inside the run.
    if (t_signal < 0.0 || t_signal > duration_ns) continue;

    const std::uint64_t k = cursor.next_pair++;
    PhotonEvent h;
    h.event_id = herald_pair_event_id(k);
    h.stripe = Stripe::Herald;
    h.origin = OriginTag::SourcePair;
    h.true_wavelength = lambda_h;
    h.true_time = t;
    h.pair_id = k;
    PhotonEvent s = h;
    s.event_id = signal_pair_event_id(k);
    s.stripe = Stripe::Signal;
    s.true_wavelength = signal_wavelength(lambda_p, lambda_h);
    s.true_time = t_signal;
    out.push_back(h);
    out.push_back(s);
  }
  return out;
}

std::vector<PhotonEvent> generate_background_window(const SimConfig& config, std::size_t w,
                                                    GenerationCursor& cursor) {
  std::vector<PhotonEvent> out;
  generate_stripe_background(config, Stripe::Herald, w, cursor.next_herald_background, out);
  generate_stripe_background(config, Stripe::Signal, w, cursor.next_signal_background, out);
  return out;
}

std::vector<PhotonEvent> generate_pairs(const SimConfig& config) {
  config.validate();
  GenerationCursor cursor;
  std::vector<PhotonEvent> out;
  const std::size_t n = window_count(config);
  for (std::size_t w = 0; w < n; ++w) {
    auto chunk = generate_pairs_window(config, w, cursor);
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

std::vector<PhotonEvent> generate_background(const SimConfig& config) {
  config.validate();
  GenerationCursor cursor;
  std::vector<PhotonEvent> out;
  const std::size_t n = window_count(config);
  for (std::size_t w = 0; w < n; ++w) {
    auto chunk = generate_background_window(config, w, cursor);
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

std::vector<PhotonEvent> merge_streams(std::vector<std::vector<PhotonEvent>> streams) {
  std::vector<PhotonEvent> out;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  out.reserve(total);
  for (auto& s : streams) {
    out.insert(out.end(), s.begin(), s.end());
    s.clear();
    s.shrink_to_fit();
  }

  std::vector<std::uint64_t> ids;
  ids.reserve(out.size());
  for (const auto& ev : out) ids.push_back(ev.event_id);
  std::sort(ids.begin(), ids.end());
  if (auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
    throw Error("merge_streams: duplicate event_id " + std::to_string(*dup));
  }

  std::sort(out.begin(), out.end(), [](const PhotonEvent& a, const PhotonEvent& b) {
    if (a.true_time != b.true_time) return a.true_time < b.true_time;
    return a.event_id < b.event_id;
  });
  return out;
}

}  // namespace coinclab
