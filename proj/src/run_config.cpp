#include "coinclab/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "coinclab/errors.hpp"
#include "coinclab/histfit.hpp"

namespace coinclab {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
    throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true/false, got '" + std::string(v) + "'");
}

std::optional<double> parse_auto(std::string_view key, std::string_view v, std::string_view word) {
  if (v == word) return std::nullopt;
  return parse_double(key, v);
}

RowRange parse_rows(std::string_view key, std::string_view v) {
  const auto colon = v.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("config key '" + std::string(key) + "': expected BEGIN:END, got '" + std::string(v) + "'");
  }
  const auto b = parse_uint(key, trim(v.substr(0, colon)));
  const auto e = parse_uint(key, trim(v.substr(colon + 1)));
  return {static_cast<int>(b), static_cast<int>(e)};
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(std::optional<double> v, std::string_view word) {
  return v ? fmt(*v) : std::string(word);
}

struct KeyEntry {
  std::string_view key;
  std::string_view help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define COINCLAB_DOUBLE_KEY(name, member, help)                                             \
  KeyEntry {                                                                                \
    name, help, [](RunConfig& c, std::string_view v) { c.member = parse_double(name, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }                                    \
  }
#define COINCLAB_SIZE_KEY(name, member, help)                                                      \
  KeyEntry {                                                                                       \
    name, help, [](RunConfig& c, std::string_view v) { c.member = parse_uint(name, v); },          \
        [](const RunConfig& c) { return std::to_string(c.member); }                                \
  }

const std::vector<KeyEntry>& registry() {
  static const std::vector<KeyEntry> keys = {
      KeyEntry{"seed", "master random seed (integer); overridden by COINCLAB_SEED, then --seed",
               [](RunConfig& c, std::string_view v) { c.seed = parse_uint("seed", v); },
               [](const RunConfig& c) { return std::to_string(c.seed); }},
      COINCLAB_DOUBLE_KEY("sim.duration", sim.duration, "simulated acquisition time [s]"),
      COINCLAB_DOUBLE_KEY("sim.window", sim.window, "length of independent generation windows [s]"),
      COINCLAB_DOUBLE_KEY("sim.pair_rate", sim.pair_rate, "photon-pair emission rate [pairs/s]"),
      COINCLAB_DOUBLE_KEY("sim.pump_center", sim.pump_center, "pump centre wavelength [nm]"),
      COINCLAB_DOUBLE_KEY("sim.pump_fwhm", sim.pump_fwhm, "pump linewidth, full width at half maximum [nm]"),
      COINCLAB_DOUBLE_KEY("sim.signal_center", sim.signal_center, "centre of the daughter-photon spectra [nm]"),
      COINCLAB_DOUBLE_KEY("sim.herald_marginal_sigma", sim.herald_marginal_sigma,
                          "standard deviation of the herald wavelength marginal [nm]"),
      COINCLAB_DOUBLE_KEY("sim.pair_time_offset", sim.pair_time_offset,
                          "mean ToA_herald - ToA_signal of true pairs [ns]"),
      COINCLAB_DOUBLE_KEY("sim.quantum_efficiency", sim.quantum_efficiency, "per-photon detection probability"),
      COINCLAB_DOUBLE_KEY("sim.herald_thermal_rate", sim.herald_background.thermal_rate,
                          "stray-light photons on the herald stripe, before QE [1/s]"),
      COINCLAB_DOUBLE_KEY("sim.herald_dark_rate", sim.herald_background.dark_rate,
                          "dark counts on the herald stripe, before QE [1/s]"),
      COINCLAB_DOUBLE_KEY("sim.herald_background_slope", sim.herald_background.slope,
                          "linear spectral tilt of herald background, in [-1, 1]"),
      COINCLAB_DOUBLE_KEY("sim.signal_thermal_rate", sim.signal_background.thermal_rate,
                          "jamming photons on the signal stripe, before QE [1/s]"),
      COINCLAB_DOUBLE_KEY("sim.signal_dark_rate", sim.signal_background.dark_rate,
                          "dark counts on the signal stripe, before QE [1/s]"),
      COINCLAB_DOUBLE_KEY("sim.signal_background_slope", sim.signal_background.slope,
                          "linear spectral tilt of signal background, in [-1, 1]"),
      COINCLAB_DOUBLE_KEY("det.time_jitter_sigma", detector.time_jitter_sigma, "per-photon ToA jitter [ns]"),
      COINCLAB_DOUBLE_KEY("det.toa_quantum", detector.toa_quantum, "ToA clock step; 0 disables quantization [ns]"),
      COINCLAB_DOUBLE_KEY("det.herald_spectral_sigma_px", detector.herald.spectral_sigma_px,
                          "herald spectral resolution [pixels]"),
      COINCLAB_DOUBLE_KEY("det.signal_spectral_sigma_px", detector.signal.spectral_sigma_px,
                          "signal spectral resolution [pixels]"),
      COINCLAB_DOUBLE_KEY("det.sum_width_target", sum_width_target,
                          "reconstructed pump-wavelength width used to calibrate auto dispersions [nm]"),
      KeyEntry{"det.herald_dispersion", "herald dispersion [nm/pixel] or 'auto'",
               [](RunConfig& c, std::string_view v) { c.herald_dispersion = parse_auto("det.herald_dispersion", v, "auto"); },
               [](const RunConfig& c) { return fmt(c.herald_dispersion, "auto"); }},
      KeyEntry{"det.signal_dispersion", "signal dispersion [nm/pixel] or 'auto'",
               [](RunConfig& c, std::string_view v) { c.signal_dispersion = parse_auto("det.signal_dispersion", v, "auto"); },
               [](const RunConfig& c) { return fmt(c.signal_dispersion, "auto"); }},
      KeyEntry{"det.herald_wavelength_at_pixel0", "herald wavelength of pixel column 0 [nm] or 'auto'",
               [](RunConfig& c, std::string_view v) { c.herald_pixel0 = parse_auto("det.herald_wavelength_at_pixel0", v, "auto"); },
               [](const RunConfig& c) { return fmt(c.herald_pixel0, "auto"); }},
      KeyEntry{"det.signal_wavelength_at_pixel0", "signal wavelength of pixel column 0 [nm] or 'auto'",
               [](RunConfig& c, std::string_view v) { c.signal_pixel0 = parse_auto("det.signal_wavelength_at_pixel0", v, "auto"); },
               [](const RunConfig& c) { return fmt(c.signal_pixel0, "auto"); }},
      KeyEntry{"det.sensor_width", "sensor columns",
               [](RunConfig& c, std::string_view v) { c.detector.sensor_width = static_cast<int>(parse_uint("det.sensor_width", v)); },
               [](const RunConfig& c) { return std::to_string(c.detector.sensor_width); }},
      KeyEntry{"det.sensor_height", "sensor rows",
               [](RunConfig& c, std::string_view v) { c.detector.sensor_height = static_cast<int>(parse_uint("det.sensor_height", v)); },
               [](const RunConfig& c) { return std::to_string(c.detector.sensor_height); }},
      KeyEntry{"det.herald_rows", "herald stripe rows BEGIN:END (end exclusive)",
               [](RunConfig& c, std::string_view v) { c.detector.herald.rows = parse_rows("det.herald_rows", v); },
               [](const RunConfig& c) {
                 return std::to_string(c.detector.herald.rows.begin) + ":" + std::to_string(c.detector.herald.rows.end);
               }},
      KeyEntry{"det.signal_rows", "signal stripe rows BEGIN:END (end exclusive)",
               [](RunConfig& c, std::string_view v) { c.detector.signal.rows = parse_rows("det.signal_rows", v); },
               [](const RunConfig& c) {
                 return std::to_string(c.detector.signal.rows.begin) + ":" + std::to_string(c.detector.signal.rows.end);
               }},
      KeyEntry{"det.tot", "constant ToT written to the events file",
               [](RunConfig& c, std::string_view v) { c.detector.tot_placeholder = static_cast<int>(parse_uint("det.tot", v)); },
               [](const RunConfig& c) { return std::to_string(c.detector.tot_placeholder); }},
      COINCLAB_DOUBLE_KEY("pair.window", pairing_window, "maximum |dT| for a coincidence [ns]"),
      KeyEntry{"pair.mode", "one_to_one (each photon used once) or nearest (signals may be reused)",
               [](RunConfig& c, std::string_view v) {
                 if (v == "one_to_one") {
                   c.pairing_mode = PairingMode::OneToOne;
                 } else if (v == "nearest") {
                   c.pairing_mode = PairingMode::NearestNeighbor;
                 } else {
                   throw ConfigError("config key 'pair.mode': expected one_to_one or nearest, got '" + std::string(v) + "'");
                 }
               },
               [](const RunConfig& c) {
                 return std::string(c.pairing_mode == PairingMode::OneToOne ? "one_to_one" : "nearest");
               }},
      COINCLAB_DOUBLE_KEY("hist.dt_half_range", dt_hist.half_range, "dT histogram half range [ns]"),
      KeyEntry{"hist.dt_bin_width", "dT bin width [ns] or 'auto' (one ToA step)",
               [](RunConfig& c, std::string_view v) { c.dt_hist.bin_width = parse_auto("hist.dt_bin_width", v, "auto"); },
               [](const RunConfig& c) { return fmt(c.dt_hist.bin_width, "auto"); }},
      COINCLAB_DOUBLE_KEY("hist.lambda_half_range", lambda_hist.half_range,
                          "pump-wavelength histogram half range around sim.pump_center [nm]"),
      KeyEntry{"hist.lambda_bin_width", "pump-wavelength bin width [nm] or 'auto' (pixel lattice step)",
               [](RunConfig& c, std::string_view v) { c.lambda_hist.bin_width = parse_auto("hist.lambda_bin_width", v, "auto"); },
               [](const RunConfig& c) { return fmt(c.lambda_hist.bin_width, "auto"); }},
      KeyEntry{"fit.pin_time_offset", "fix dT_s0 in the time fit [ns], or 'none' to fit it",
               [](RunConfig& c, std::string_view v) { c.pin_time_offset = parse_auto("fit.pin_time_offset", v, "none"); },
               [](const RunConfig& c) { return fmt(c.pin_time_offset, "none"); }},
      COINCLAB_DOUBLE_KEY("sweep.efficiency_min", sweep.efficiency_min, "lowest target efficiency of ratio sweeps"),
      COINCLAB_DOUBLE_KEY("sweep.efficiency_max", sweep.efficiency_max, "highest target efficiency of ratio sweeps"),
      COINCLAB_SIZE_KEY("sweep.efficiency_points", sweep.efficiency_points, "number of target efficiencies"),
      COINCLAB_DOUBLE_KEY("sweep.box_time_halfwidth", sweep.box_time_halfwidth, "fixed temporal half-window of box cuts [ns]"),
      COINCLAB_DOUBLE_KEY("sweep.box_spectral_min", sweep.box_spectral_min, "smallest spectral half-window of box cuts [nm]"),
      COINCLAB_DOUBLE_KEY("sweep.box_spectral_max", sweep.box_spectral_max, "largest spectral half-window of box cuts [nm]"),
      COINCLAB_SIZE_KEY("sweep.box_points", sweep.box_points, "number of spectral half-windows"),
      COINCLAB_DOUBLE_KEY("sweep.reference_efficiency", sweep.reference_efficiency,
                          "efficiency at which SBR improvements are reported"),
      COINCLAB_DOUBLE_KEY("ygrid.lambda_half_range", ygrid.lambda_half_range, "Y-surface half range in lambda_p [nm]"),
      COINCLAB_SIZE_KEY("ygrid.lambda_points", ygrid.lambda_points, "Y-surface points along lambda_p"),
      COINCLAB_DOUBLE_KEY("ygrid.dt_half_range", ygrid.dt_half_range, "Y-surface half range in dT [ns]"),
      COINCLAB_SIZE_KEY("ygrid.dt_points", ygrid.dt_points, "Y-surface points along dT"),
      KeyEntry{"out.dir", "output directory",
               [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
               [](const RunConfig& c) { return c.out_dir; }},
      KeyEntry{"out.write_events", "write events.csv (true/false)",
               [](RunConfig& c, std::string_view v) { c.write_events = parse_bool("out.write_events", v); },
               [](const RunConfig& c) { return std::string(c.write_events ? "true" : "false"); }},
  };
  return keys;
}

#undef COINCLAB_DOUBLE_KEY
#undef COINCLAB_SIZE_KEY

const KeyEntry& find_key(std::string_view key) {
  for (const auto& k : registry()) {
    if (k.key == key) return k;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

const std::vector<ConfigKeyInfo>& config_keys() {
  static const std::vector<ConfigKeyInfo> info = [] {
    std::vector<ConfigKeyInfo> v;
    for (const auto& k : registry()) v.push_back({k.key, k.help});
    return v;
  }();
  return info;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  find_key(key).set(*this, trim(value));
}

std::string RunConfig::get(std::string_view key) const { return find_key(key).get(*this); }

void RunConfig::load_text(std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : registry()) {
    out += k.key;
    out += " = ";
    out += k.get(*this);
    out += '\n';
  }
  return out;
}

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  r.sim.rng_seed = seed;
  if (!herald_dispersion || !signal_dispersion) {
    const double d = calibrate_dispersion(sum_width_target, sim.pump_fwhm, sim.signal_center,
                                          detector.herald.spectral_sigma_px,
                                          detector.signal.spectral_sigma_px);
    r.detector.herald.dispersion = herald_dispersion.value_or(d);
    r.detector.signal.dispersion = signal_dispersion.value_or(d);
  } else {
    r.detector.herald.dispersion = *herald_dispersion;
    r.detector.signal.dispersion = *signal_dispersion;
  }
  const double half = 0.5 * r.detector.sensor_width;
  r.detector.herald.wavelength_at_pixel0 =
      herald_pixel0.value_or(sim.signal_center - half * r.detector.herald.dispersion);
  r.detector.signal.wavelength_at_pixel0 =
      signal_pixel0.value_or(sim.signal_center - half * r.detector.signal.dispersion);
  r.sim.herald_span = r.detector.span(Stripe::Herald);
  r.sim.signal_span = r.detector.span(Stripe::Signal);
  r.validate();
  return r;
}

void RunConfig::validate() const {
  sim.validate();
  detector.validate();
  require(pairing_window > 0.0, "pair.window must be > 0");
  require(dt_hist.half_range > 0.0 && lambda_hist.half_range > 0.0, "histogram half ranges must be > 0");
  require(!dt_hist.bin_width || *dt_hist.bin_width > 0.0, "hist.dt_bin_width must be > 0");
  require(!lambda_hist.bin_width || *lambda_hist.bin_width > 0.0, "hist.lambda_bin_width must be > 0");
  require(sweep.efficiency_min > 0.0 && sweep.efficiency_max <= 1.0 &&
              sweep.efficiency_min <= sweep.efficiency_max && sweep.efficiency_points >= 1,
          "sweep efficiencies must satisfy 0 < min <= max <= 1 with >= 1 point");
  require(sweep.box_time_halfwidth > 0.0 && sweep.box_spectral_min > 0.0 &&
              sweep.box_spectral_min <= sweep.box_spectral_max && sweep.box_points >= 1,
          "box sweep needs positive halfwidths with min <= max and >= 1 point");
  require(sweep.reference_efficiency > 0.0 && sweep.reference_efficiency <= 1.0,
          "sweep.reference_efficiency must lie in (0, 1]");
  require(ygrid.lambda_points >= 1 && ygrid.dt_points >= 1 && ygrid.lambda_half_range > 0.0 &&
              ygrid.dt_half_range > 0.0,
          "ygrid needs positive ranges and >= 1 point per axis");
  require(sum_width_target > 0.0, "det.sum_width_target must be > 0");
  require(!out_dir.empty(), "out.dir must not be empty");
}

std::vector<double> RunConfig::dt_edges() const {
  const double width = dt_hist.bin_width.value_or(detector.toa_quantum > 0.0 ? detector.toa_quantum : 2.0);
  // dT of quantized ToAs lies on multiples of the ToA step; centre bins there.
  return lattice_edges(0.0, width, dt_hist.half_range);
}

std::vector<double> RunConfig::lambda_edges() const {
  const double center = sim.pump_center;
  const double range = lambda_hist.half_range;
  if (lambda_hist.bin_width) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(2.0 * range / *lambda_hist.bin_width)));
    return uniform_edges(center - range, center + range, n);
  }
  const StripeCalibration& h = detector.herald;
  const StripeCalibration& s = detector.signal;
  const double c = sim.signal_center;
  if (std::abs(h.dispersion - s.dispersion) > 1e-12 * h.dispersion) {
    return uniform_edges(center - range, center + range,
                         static_cast<std::size_t>(std::max(1.0, std::round(range / 0.01))));
  }
  // Pixel-centre wavelengths put the reconstructed pump wavelength on a
  // lattice of step d/4 near degeneracy, displaced downward by the quadratic
  // term (lambda_h - lambda_s)^2 / (4 S), on average sigma_h^2 / (2 c).
  const double width = 0.25 * h.dispersion;
  const double xh = std::round((c - h.wavelength_at_pixel0) / h.dispersion);
  const double xs = std::round((c - s.wavelength_at_pixel0) / s.dispersion);
  const double lattice_point = reconstruct_pump_wavelength(h.wavelength_at_pixel0 + xh * h.dispersion,
                                                           s.wavelength_at_pixel0 + xs * s.dispersion);
  const double shift = sim.herald_marginal_sigma * sim.herald_marginal_sigma / (2.0 * c);
  const double steps = std::round((center - lattice_point) / width);
  return lattice_edges(lattice_point + steps * width - shift, width, range);
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* v = std::getenv("COINCLAB_SEED");
  if (!v || !*v) return std::nullopt;
  return parse_uint("COINCLAB_SEED", trim(v));
}

}  // namespace coinclab
