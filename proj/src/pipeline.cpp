#include "coinclab/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coinclab/errors.hpp"
#include "coinclab/event_io.hpp"

namespace coinclab {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr std::string_view kEventsFile = "events.csv";
constexpr std::string_view kSimulationManifest = "simulation.json";
constexpr std::string_view kAnalysisManifest = "analysis.json";

// Records the wall-clock time of a scope into `timings` (if any).
class ScopedTimer {
 public:
  ScopedTimer(StageTimings* timings, std::string name)
      : timings_(timings), name_(std::move(name)), start_(Clock::now()) {}
  ~ScopedTimer() {
    if (timings_) {
      timings_->add(std::move(name_), std::chrono::duration<double>(Clock::now() - start_).count());
    }
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  StageTimings* timings_;
  std::string name_;
  Clock::time_point start_;
};

std::string join(const std::string& dir, std::string_view file) {
  return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

json config_echo(const RunConfig& config) {
  json j = json::object();
  for (const auto& k : config_keys()) {
    if (k.key == "out.dir") continue;  // location is not part of the result
    j[std::string(k.key)] = config.get(k.key);
  }
  return j;
}

json calibration_json(const RunConfig& config) {
  const auto stripe = [](const StripeCalibration& s, const WavelengthSpan& span) {
    return json{{"dispersion_nm_per_px", s.dispersion},
                {"wavelength_at_pixel0_nm", s.wavelength_at_pixel0},
                {"spectral_sigma_px", s.spectral_sigma_px},
                {"span_nm", {span.lo, span.hi}}};
  };
  return json{{"herald", stripe(config.detector.herald, config.detector.span(Stripe::Herald))},
              {"signal", stripe(config.detector.signal, config.detector.span(Stripe::Signal))},
              {"predicted_sum_width_nm",
               predicted_sum_width(config.sim.pump_fwhm, config.sim.signal_center,
                                   config.detector.herald.spectral_sigma_px,
                                   config.detector.signal.spectral_sigma_px,
                                   config.detector.herald.dispersion, config.detector.signal.dispersion)}};
}

json header_json(const RunConfig& config) {
  return json{{"tool", "coinclab"}, {"version", COINCLAB_VERSION}, {"seed", config.seed}};
}

template <class P>
json fit_json(const FitSummary<P>& fit) {
  json params = json::object();
  json errors = json::object();
  const auto v = fit.result.params.to_array();
  const auto e = fit.result.errors.to_array();
  for (std::size_t i = 0; i < P::kSize; ++i) {
    params[std::string(P::kNames[i])] = v[i];
    errors[std::string(P::kNames[i])] = e[i];
  }
  const FitQuality& q = fit.result.quality;
  return json{{"frozen", fit.frozen}, {"params", params},      {"errors", errors},
              {"chi2", q.chi2},       {"ndf", q.ndf},          {"reduced_chi2", q.reduced_chi2},
              {"iterations", q.iterations}};
}

template <class P>
P params_from_json(const json& j, const char* what) {
  const json& src = j.contains("params") ? j.at("params") : j;
  std::array<double, P::kSize> a{};
  for (std::size_t i = 0; i < P::kSize; ++i) {
    const std::string name(P::kNames[i]);
    if (!src.contains(name) || !src.at(name).is_number()) {
      throw ConfigError(std::string("frozen fits: ") + what + " parameter '" + name + "' missing or not a number");
    }
    a[i] = src.at(name).template get<double>();
  }
  P p = P::from_array(a);
  p.validate();
  return p;
}

// Chi-square of fixed parameters against a histogram, for frozen fits.
template <class P, class Model>
FitQuality frozen_quality(const Histogram1D& h, const P& p, Model model) {
  FitQuality q;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double n = static_cast<double>(h.counts[i]);
    const double sigma = std::max(1.0, std::sqrt(n));
    const double r = (n - model(p, h.center(i), h.width(i))) / sigma;
    q.chi2 += r * r;
  }
  q.ndf = static_cast<int>(h.bins());
  q.reduced_chi2 = q.ndf > 0 ? q.chi2 / q.ndf : 0.0;
  return q;
}

std::vector<double> per_class_values(std::span<const PairRecord> pairs, PairClass c, bool time) {
  std::vector<double> v;
  for (const auto& p : pairs) {
    if (p.pair_class == c) v.push_back(time ? p.delta_t : p.lambda_p_rec);
  }
  return v;
}

void write_histogram_csv(const std::string& path, const Histogram1D& h,
                         std::span<const PairRecord> pairs, bool time, bool has_truth,
                         const std::function<double(double, double)>& model) {
  std::vector<Histogram1D> by_class;
  if (has_truth) {
    for (PairClass c : kAllPairClasses) by_class.push_back(histogram(per_class_values(pairs, c, time), h.edges));
  }
  std::string out = "bin_lo,bin_hi,center,count";
  if (model) out += ",model";
  if (has_truth) {
    for (PairClass c : kAllPairClasses) {
      out += ',';
      out += pair_class_code(c);
    }
  }
  out += '\n';
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out += format_double(h.edges[i]) + ',' + format_double(h.edges[i + 1]) + ',' + format_double(h.center(i)) +
           ',' + std::to_string(h.counts[i]);
    if (model) out += ',' + format_double(model(h.center(i), h.width(i)));
    for (const auto& c : by_class) out += ',' + std::to_string(c.counts[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_hist2d(const std::string& path, const AnalysisResult& a) {
  const auto& le = a.lambda_hist.edges;
  const auto& te = a.dt_hist.edges;
  const std::size_t nt = te.size() - 1;
  std::vector<std::uint64_t> counts((le.size() - 1) * nt, 0);
  for (const auto& p : a.pairs) {
    const auto il = a.lambda_hist.find_bin(p.lambda_p_rec);
    const auto it = a.dt_hist.find_bin(p.delta_t);
    if (il < 0 || it < 0) continue;
    ++counts[static_cast<std::size_t>(il) * nt + static_cast<std::size_t>(it)];
  }
  // Sparse: only occupied cells.
  std::string out = "lambda_lo,lambda_hi,dt_lo,dt_hi,count\n";
  for (std::size_t il = 0; il + 1 < le.size(); ++il) {
    for (std::size_t it = 0; it < nt; ++it) {
      const auto c = counts[il * nt + it];
      if (c == 0) continue;
      out += format_double(le[il]) + ',' + format_double(le[il + 1]) + ',' + format_double(te[it]) + ',' +
             format_double(te[it + 1]) + ',' + std::to_string(c) + '\n';
    }
  }
  write_text_file(path, out);
}

json analysis_json(const RunConfig& config, const AnalysisResult& a) {
  json classes = json::object();
  if (a.has_truth) {
    for (PairClass c : kAllPairClasses) classes[std::string(pair_class_code(c))] = a.class_counts[c];
  }
  const auto hist_info = [](const Histogram1D& h) {
    return json{{"bins", h.bins()},         {"lo", h.lo()},           {"hi", h.hi()},
                {"bin_width", h.width(0)},  {"entries", h.entries()}, {"underflow", h.underflow},
                {"overflow", h.overflow}};
  };
  json j = header_json(config);
  j["config"] = config_echo(config);
  j["calibration"] = calibration_json(config);
  j["input"] = json{{"herald_events", a.herald_events},
                    {"signal_events", a.signal_events},
                    {"has_truth", a.has_truth},
                    {"generated_pairs", a.generated_pairs ? json(*a.generated_pairs) : json(nullptr)}};
  j["pairing"] = json{{"mode", config.get("pair.mode")},
                      {"window_ns", config.pairing_window},
                      {"pairs", a.pairs.size()},
                      {"classes", classes}};
  j["histograms"] = json{{"delta_t", hist_info(a.dt_hist)}, {"lambda_p", hist_info(a.lambda_hist)}};
  j["fits"] = json{{"time", fit_json(a.time_fit)}, {"spectral", fit_json(a.spectral_fit)}};
  if (a.has_truth) {
    json imp = json::object();
    for (const auto& [label, v] : a.sbr_improvement) imp[label] = v ? json(*v) : json(nullptr);
    json curves = json::array();
    for (const auto& c : a.curves) curves.push_back(json{{"method", c.label()}, {"points", c.points.size()}});
    j["selection"] = json{{"reference_efficiency", config.sweep.reference_efficiency},
                          {"box_time_halfwidth_ns", config.sweep.box_time_halfwidth},
                          {"sbr_improvement_combined_vs", imp},
                          {"curves", curves}};
  }
  return j;
}

struct LoadedEvents {
  EventFile file;
  std::optional<std::uint64_t> generated_pairs;
};

// Generated-pair count from a simulation manifest next to the events file.
std::optional<std::uint64_t> sibling_generated_pairs(const std::string& events_path) {
  const auto manifest = std::filesystem::path(events_path).parent_path() / kSimulationManifest;
  std::ifstream in(manifest, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto j = json::parse(in);
    return j.at("generation").at("pairs").get<std::uint64_t>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

LoadedEvents load_events(const std::string& path, const RunConfig& config) {
  LoadedEvents l{read_events_file(path, config.detector), std::nullopt};
  if (l.file.has_truth) l.generated_pairs = sibling_generated_pairs(path);
  return l;
}

AnalysisResult analyze_impl(std::vector<DetectedEvent> events, bool has_truth, const RunConfig& config,
                            const FrozenFits& frozen, std::optional<std::uint64_t> generated_pairs,
                            StageTimings* timings, const std::string* dump_dir) {
  AnalysisResult a;
  a.has_truth = has_truth;
  a.generated_pairs = generated_pairs;
  {
    ScopedTimer t(timings, "pairing");
    auto stripes = split_by_stripe(std::move(events));
    a.herald_events = stripes.herald.size();
    a.signal_events = stripes.signal.size();
    a.pairs = find_pairs(stripes.herald, stripes.signal, config.pairing_window, config.pairing_mode);
  }
  if (!has_truth) {
    for (auto& p : a.pairs) p.pair_class.reset();
  }
  a.class_counts = count_classes(a.pairs);

  {
    ScopedTimer t(timings, "histograms");
    std::vector<double> dt;
    std::vector<double> lp;
    dt.reserve(a.pairs.size());
    lp.reserve(a.pairs.size());
    for (const auto& p : a.pairs) {
      dt.push_back(p.delta_t);
      lp.push_back(p.lambda_p_rec);
    }
    a.dt_hist = histogram(dt, config.dt_edges());
    a.lambda_hist = histogram(lp, config.lambda_edges());
  }

  try {
    ScopedTimer t(timings, "fits");
    if (frozen.time) {
      a.time_fit.frozen = true;
      a.time_fit.result.params = *frozen.time;
      a.time_fit.result.quality = frozen_quality(a.dt_hist, *frozen.time, time_model);
    } else {
      TimeFitParams init = initial_time_params(a.dt_hist);
      FitOptions options;
      if (config.pin_time_offset) {
        init.offset = *config.pin_time_offset;
        options.fixed.assign(TimeFitParams::kSize, false);
        options.fixed[TimeFitParams::kOffset] = true;
      }
      a.time_fit.result = fit_time_model(a.dt_hist, init, options);
    }
    if (frozen.spectral) {
      a.spectral_fit.frozen = true;
      a.spectral_fit.result.params = *frozen.spectral;
      a.spectral_fit.result.quality = frozen_quality(a.lambda_hist, *frozen.spectral, spectral_model);
    } else {
      a.spectral_fit.result = fit_spectral_model(a.lambda_hist, initial_spectral_params(a.lambda_hist));
    }
  } catch (const Error& e) {
    if (dump_dir) {
      ensure_dir(*dump_dir);
      write_histogram_csv(join(*dump_dir, "fit_failure_hist_delta_t.csv"), a.dt_hist, a.pairs, true, has_truth, {});
      write_histogram_csv(join(*dump_dir, "fit_failure_hist_lambda_p.csv"), a.lambda_hist, a.pairs, false,
                          has_truth, {});
    }
    // Too few pairs to fit is reported as a fit failure, not a domain error.
    if (dynamic_cast<const DomainError*>(&e)) throw FitError(std::string("fit failed: ") + e.what(), {});
    throw;
  }
  a.model = DiscriminantModel{a.spectral_fit.result.params, a.time_fit.result.params};
  a.model.validate();

  if (has_truth && a.class_counts[PairClass::TrueCoincidence] > 0) {
    ScopedTimer t(timings, "sweeps");
    const SweepSpec& s = config.sweep;
    const SweepOptions options{s.box_time_halfwidth, generated_pairs};
    const auto effs = linspace(s.efficiency_min, s.efficiency_max, s.efficiency_points);
    for (Method m : {Method::Combined, Method::TimeOnly, Method::SpectralOnly}) {
      a.curves.push_back(sweep_efficiencies(a.pairs, a.model, m, effs, options));
    }
    const auto widths = linspace(s.box_spectral_min, s.box_spectral_max, s.box_points);
    a.curves.push_back(sweep(a.pairs, a.model, Method::BoxCut, widths, options));
    for (std::size_t i = 1; i < a.curves.size(); ++i) {
      std::optional<double> v;
      try {
        v = sbr_improvement_at(a.curves[0], a.curves[i], s.reference_efficiency);
      } catch (const DomainError&) {
      }
      a.sbr_improvement.emplace_back(a.curves[i].label(), v);
    }
  }
  return a;
}

RunConfig resolve(const RunConfig& config) { return config.resolved(); }

}  // namespace

std::string StageTimings::to_json() const {
  json j = json::object();
  for (const auto& [name, s] : stages) j[name] = s;
  return j.dump(2);
}

SimulationResult simulate(const RunConfig& config, StageTimings* timings) {
  const SimConfig& sim = config.sim;
  sim.validate();
  config.detector.validate();

  SimulationResult r;
  {
    ScopedTimer t(timings, "simulate");
    const double expected = sim.quantum_efficiency * sim.duration *
                            (2.0 * sim.pair_rate + sim.herald_background_rate() + sim.signal_background_rate());
    r.events.reserve(static_cast<std::size_t>(expected + 6.0 * std::sqrt(expected)) + 1024);

    GenerationCursor cursor;
    const std::size_t windows = window_count(sim);
    for (std::size_t w = 0; w < windows; ++w) {
      const std::size_t chunk_begin = r.events.size();
      const auto pairs = generate_pairs_window(sim, w, cursor);
      detect_unsorted(pairs, config.detector, sim.quantum_efficiency, config.seed, r.detection, r.events);
      const auto background = generate_background_window(sim, w, cursor);
      for (const auto& ev : background) {
        const bool dark = ev.origin == OriginTag::DarkCount;
        if (ev.stripe == Stripe::Herald) {
          ++(dark ? r.generated.herald_dark : r.generated.herald_thermal);
        } else {
          ++(dark ? r.generated.signal_dark : r.generated.signal_thermal);
        }
      }
      detect_unsorted(background, config.detector, sim.quantum_efficiency, config.seed, r.detection,
                      r.events);

      // The events file stores toa with 4 decimals; normalize so in-memory
      // analysis sees exactly what a reader of the file would.
      const auto first = r.events.begin() + static_cast<std::ptrdiff_t>(chunk_begin);
      for (auto it = first; it != r.events.end(); ++it) it->toa = normalize_toa(it->toa);
      std::sort(first, r.events.end(), toa_order);
      // Jitter only moves events across a window edge by nanoseconds, so
      // merging with the previous window restores the global order.
      if (chunk_begin > 0 && toa_order(*first, *(first - 1))) {
        const auto from = std::upper_bound(r.events.begin(), first, *first, toa_order);
        std::inplace_merge(from, first, r.events.end(), toa_order);
      }
    }
    r.generated.pairs = cursor.next_pair;
  }
  return r;
}

FrozenFits load_frozen_fits(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frozen-fit file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("frozen fits '" + path + "': " + e.what());
  }
  const json& fits = j.contains("fits") ? j.at("fits") : j;
  if (!fits.is_object()) throw ConfigError("frozen fits '" + path + "': expected a JSON object");
  FrozenFits f;
  if (fits.contains("time") && !fits.at("time").empty()) f.time = params_from_json<TimeFitParams>(fits.at("time"), "time");
  if (fits.contains("spectral") && !fits.at("spectral").empty()) {
    f.spectral = params_from_json<SpectralFitParams>(fits.at("spectral"), "spectral");
  }
  return f;
}

AnalysisResult analyze(std::vector<DetectedEvent> events, bool has_truth, const RunConfig& config,
                       const FrozenFits& frozen, std::optional<std::uint64_t> generated_pairs,
                       StageTimings* timings) {
  return analyze_impl(std::move(events), has_truth, config, frozen, generated_pairs, timings, nullptr);
}

void write_simulation_outputs(const std::string& dir, const RunConfig& config, const SimulationResult& sim) {
  ensure_dir(dir);
  if (config.write_events) write_events_file(join(dir, kEventsFile), sim.events, config.detector.tot_placeholder);

  std::uint64_t per_stripe[2] = {0, 0};
  std::uint64_t per_origin[3] = {0, 0, 0};
  for (const auto& e : sim.events) {
    ++per_stripe[static_cast<int>(e.stripe)];
    if (e.origin) ++per_origin[static_cast<int>(*e.origin)];
  }
  const DetectionReport& d = sim.detection;
  const GenerationCounts& g = sim.generated;
  json j = header_json(config);
  j["config"] = config_echo(config);
  j["calibration"] = calibration_json(config);
  j["generation"] = json{{"pairs", g.pairs},
                         {"photons", g.photons()},
                         {"herald_thermal", g.herald_thermal},
                         {"herald_dark", g.herald_dark},
                         {"signal_thermal", g.signal_thermal},
                         {"signal_dark", g.signal_dark},
                         {"expected_pairs", config.sim.pair_rate * config.sim.duration}};
  j["detection"] = json{{"input", d.input},
                        {"efficiency_lost", d.efficiency_lost},
                        {"out_of_span", d.out_of_span},
                        {"clamped", d.clamped},
                        {"detected", d.detected},
                        {"conserved", d.input == d.efficiency_lost + d.out_of_span + d.detected &&
                                          d.input == g.photons()},
                        {"herald_events", per_stripe[0]},
                        {"signal_events", per_stripe[1]},
                        {"source_pair_events", per_origin[0]},
                        {"thermal_events", per_origin[1]},
                        {"dark_events", per_origin[2]}};
  write_text_file(join(dir, kSimulationManifest), j.dump(2) + "\n");
}

void write_curves(const std::string& path, const AnalysisResult& a) {
  std::string out = "method,parameter,efficiency,purity,sbr,snr,s,b,efficiency_generated\n";
  for (const auto& c : a.curves) {
    for (const auto& p : c.points) {
      const SelectionOutcome& o = p.outcome;
      out += c.label() + ',' + format_double(p.parameter) + ',' + format_double(o.efficiency) + ',' +
             opt(o.purity) + ',' + opt(o.sbr) + ',' + format_double(o.snr) + ',' + std::to_string(o.s) + ',' +
             std::to_string(o.b) + ',' + opt(o.efficiency_generated) + '\n';
    }
  }
  write_text_file(path, out);
}

void write_ygrid(const std::string& path, const RunConfig& config, const DiscriminantModel& model) {
  const YGridSpec& g = config.ygrid;
  const auto la = linspace(model.spectral.center - g.lambda_half_range, model.spectral.center + g.lambda_half_range,
                           g.lambda_points);
  const auto ta = linspace(model.time.offset - g.dt_half_range, model.time.offset + g.dt_half_range, g.dt_points);
  std::string out = "lambda_p_nm,delta_t_ns,y\n";
  for (const auto& p : y_surface(model, la, ta)) {
    out += format_double(p.lambda_p) + ',' + format_double(p.delta_t) + ',' + format_double(p.y) + '\n';
  }
  write_text_file(path, out);
}

void write_analysis_outputs(const std::string& dir, const RunConfig& config, const AnalysisResult& a) {
  ensure_dir(dir);
  write_pairs_file(join(dir, "pairs.csv"), a.pairs);
  const auto tp = a.time_fit.result.params;
  const auto sp = a.spectral_fit.result.params;
  write_histogram_csv(join(dir, "hist_delta_t.csv"), a.dt_hist, a.pairs, true, a.has_truth,
                      [&](double x, double w) { return time_model(tp, x, w); });
  write_histogram_csv(join(dir, "hist_lambda_p.csv"), a.lambda_hist, a.pairs, false, a.has_truth,
                      [&](double x, double w) { return spectral_model(sp, x, w); });
  write_hist2d(join(dir, "hist2d.csv"), a);
  if (a.has_truth) write_curves(join(dir, "curves.csv"), a);
  write_ygrid(join(dir, "ygrid.csv"), config, a.model);
  write_text_file(join(dir, kAnalysisManifest), analysis_json(config, a).dump(2) + "\n");
}

void write_fit_failure_dump(const std::string& dir, const RunConfig& config, std::span<const PairRecord> pairs) {
  ensure_dir(dir);
  std::vector<double> dt;
  std::vector<double> lp;
  for (const auto& p : pairs) {
    dt.push_back(p.delta_t);
    lp.push_back(p.lambda_p_rec);
  }
  const bool truth = std::any_of(pairs.begin(), pairs.end(), [](const PairRecord& p) { return p.pair_class.has_value(); });
  write_histogram_csv(join(dir, "fit_failure_hist_delta_t.csv"), histogram(dt, config.dt_edges()), pairs, true,
                      truth, {});
  write_histogram_csv(join(dir, "fit_failure_hist_lambda_p.csv"), histogram(lp, config.lambda_edges()), pairs,
                      false, truth, {});
}

void run_simulate(const RunConfig& config, StageTimings* timings) {
  const RunConfig c = resolve(config);
  const auto sim = simulate(c, timings);
  ScopedTimer t(timings, "write");
  write_simulation_outputs(c.out_dir, c, sim);
}

void run_pipeline(const RunConfig& config, const FrozenFits& frozen, StageTimings* timings) {
  const RunConfig c = resolve(config);
  auto sim = simulate(c, timings);
  {
    ScopedTimer t(timings, "write_simulation");
    write_simulation_outputs(c.out_dir, c, sim);
  }
  const auto generated = sim.generated.pairs;
  const auto a = analyze_impl(std::move(sim.events), true, c, frozen, generated, timings, &c.out_dir);
  ScopedTimer t(timings, "write_analysis");
  write_analysis_outputs(c.out_dir, c, a);
}

void run_analyze(const std::string& events_path, const RunConfig& config, const FrozenFits& frozen,
                 StageTimings* timings) {
  const RunConfig c = resolve(config);
  LoadedEvents l;
  {
    ScopedTimer t(timings, "read_events");
    l = load_events(events_path, c);
  }
  const auto a = analyze_impl(std::move(l.file.events), l.file.has_truth, c, frozen, l.generated_pairs, timings,
                              &c.out_dir);
  ScopedTimer t(timings, "write_analysis");
  write_analysis_outputs(c.out_dir, c, a);
}

void run_sweep(const std::string& events_path, const RunConfig& config, const FrozenFits& frozen,
               StageTimings* timings) {
  const RunConfig c = resolve(config);
  LoadedEvents l = load_events(events_path, c);
  if (!l.file.has_truth) throw IoError(events_path + ": sweeps need the origin column (truth tags)");
  const auto a = analyze_impl(std::move(l.file.events), true, c, frozen, l.generated_pairs, timings, &c.out_dir);
  ensure_dir(c.out_dir);
  write_curves(join(c.out_dir, "curves.csv"), a);
}

void run_ygrid(const std::string& events_path, const RunConfig& config, const FrozenFits& frozen,
               StageTimings* timings) {
  const RunConfig c = resolve(config);
  DiscriminantModel model;
  if (events_path.empty()) {
    if (!frozen.complete()) {
      throw ConfigError("ygrid without an events file needs frozen time and spectral fits");
    }
    model = DiscriminantModel{*frozen.spectral, *frozen.time};
  } else {
    LoadedEvents l = load_events(events_path, c);
    model = analyze_impl(std::move(l.file.events), false, c, frozen, std::nullopt, timings, &c.out_dir).model;
  }
  ensure_dir(c.out_dir);
  write_ygrid(join(c.out_dir, "ygrid.csv"), c, model);
}

}  // namespace coinclab
