#include "coinclab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coinclab/errors.hpp"

namespace coinclab {

namespace {

bool is_true(const PairRecord& p) { return p.pair_class == PairClass::TrueCoincidence; }

struct ClassifiedValues {
  std::vector<double> signal;
  std::vector<double> background;
};

ClassifiedValues split_sorted(std::span<const PairRecord> pairs, auto value_of) {
  ClassifiedValues v;
  for (const auto& p : pairs) {
    if (!p.pair_class) continue;
    const auto x = value_of(p);
    if (!x) continue;
    (is_true(p) ? v.signal : v.background).push_back(*x);
  }
  std::sort(v.signal.begin(), v.signal.end());
  std::sort(v.background.begin(), v.background.end());
  return v;
}

std::uint64_t count_below(const std::vector<double>& sorted, double t) {
  return static_cast<std::uint64_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

std::uint64_t count_at_most(const std::vector<double>& sorted, double t) {
  return static_cast<std::uint64_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

std::uint64_t count_true(std::span<const PairRecord> pairs) {
  return static_cast<std::uint64_t>(std::count_if(pairs.begin(), pairs.end(), is_true));
}

void require_truth(std::span<const PairRecord> pairs) {
  if (!pairs.empty() && std::none_of(pairs.begin(), pairs.end(), [](const PairRecord& p) { return p.pair_class.has_value(); })) {
    throw Error("sweep: pairs carry no truth classes");
  }
}

}  // namespace

SelectionOutcome outcome_from_counts(std::uint64_t s, std::uint64_t b, std::uint64_t total_true,
                                     std::optional<std::uint64_t> generated_pairs) {
  if (total_true == 0) throw DomainError("outcome: no true coincidences to normalize to");
  SelectionOutcome o;
  o.s = s;
  o.b = b;
  const auto sd = static_cast<double>(s);
  const auto bd = static_cast<double>(b);
  o.efficiency = sd / static_cast<double>(total_true);
  if (generated_pairs && *generated_pairs > 0) {
    o.efficiency_generated = sd / static_cast<double>(*generated_pairs);
  }
  if (s + b > 0) {
    o.purity = sd / (sd + bd);
    o.snr = sd / std::sqrt(sd + bd);
  }
  if (b > 0) o.sbr = sd / bd;
  return o;
}

SelectionOutcome outcome(std::span<const PairRecord> selected, std::uint64_t total_true,
                         std::optional<std::uint64_t> generated_pairs) {
  std::uint64_t s = 0;
  std::uint64_t b = 0;
  for (const auto& p : selected) {
    if (!p.pair_class) continue;
    (is_true(p) ? s : b) += 1;
  }
  return outcome_from_counts(s, b, total_true, generated_pairs);
}

MethodCurve sweep(std::span<const PairRecord> pairs, const DiscriminantModel& model, Method method,
                  std::span<const double> grid, const SweepOptions& options) {
  if (grid.empty()) throw DomainError("sweep: empty parameter grid");
  require_truth(pairs);
  const std::uint64_t total_true = count_true(pairs);

  MethodCurve curve;
  curve.method = method;
  if (method == Method::BoxCut) {
    // Time window fixed; the remaining cut is on |lambda - lambda0| <= w.
    const double tw = options.box_time_halfwidth;
    const auto values = split_sorted(pairs, [&](const PairRecord& p) -> std::optional<double> {
      if (std::abs(p.delta_t - model.time.offset) > tw) return std::nullopt;
      return std::abs(p.lambda_p_rec - model.spectral.center);
    });
    for (double w : grid) {
      curve.points.push_back({w, outcome_from_counts(count_at_most(values.signal, w),
                                                     count_at_most(values.background, w), total_true,
                                                     options.generated_pairs)});
    }
  } else {
    const auto values = split_sorted(pairs, [&](const PairRecord& p) -> std::optional<double> {
      return method_statistic(model, method, p.lambda_p_rec, p.delta_t);
    });
    for (double t : grid) {
      curve.points.push_back({t, outcome_from_counts(count_below(values.signal, t),
                                                     count_below(values.background, t), total_true,
                                                     options.generated_pairs)});
    }
  }
  return curve;
}

MethodCurve sweep_efficiencies(std::span<const PairRecord> pairs, const DiscriminantModel& model,
                               Method method, std::span<const double> efficiencies,
                               const SweepOptions& options) {
  if (method == Method::BoxCut) throw DomainError("sweep_efficiencies: box cuts sweep halfwidths");
  if (efficiencies.empty()) throw DomainError("sweep: empty parameter grid");
  std::vector<double> true_values;
  for (const auto& p : pairs) {
    if (is_true(p)) true_values.push_back(method_statistic(model, method, p.lambda_p_rec, p.delta_t));
  }
  std::sort(true_values.begin(), true_values.end());
  std::vector<double> thresholds;
  for (double eta : efficiencies) thresholds.push_back(threshold_from_sorted(true_values, eta));
  return sweep(pairs, model, method, thresholds, options);
}

double interpolate_sbr(const MethodCurve& curve, double eta) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve.points) {
    pts.emplace_back(p.outcome.efficiency,
                     p.outcome.sbr.value_or(std::numeric_limits<double>::infinity()));
  }
  std::sort(pts.begin(), pts.end());
  if (pts.empty() || eta < pts.front().first || eta > pts.back().first) {
    throw DomainError("interpolate_sbr: efficiency " + std::to_string(eta) + " outside curve '" +
                      curve.label() + "'");
  }
  const auto hi = std::lower_bound(pts.begin(), pts.end(), std::make_pair(eta, -std::numeric_limits<double>::infinity()));
  if (hi->first == eta || hi == pts.begin()) return hi->second;
  const auto lo = std::prev(hi);
  const double f = (eta - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

double sbr_improvement_at(const MethodCurve& a, const MethodCurve& b, double eta) {
  return interpolate_sbr(a, eta) / interpolate_sbr(b, eta) - 1.0;
}

double snr_from_sbr_change(double s, double b, double new_sbr) {
  if (!(s > 0.0) || !(b > 0.0) || !(new_sbr > 0.0)) {
    throw DomainError("snr_from_sbr_change: s, b and new_sbr must be > 0");
  }
  const double b_new = s / new_sbr;
  return std::sqrt((s + b) / (s + b_new));
}

double background_ratio_for_snr_gain(double sbr_factor, double snr_gain) {
  if (!(sbr_factor > 1.0) || !(snr_gain > 1.0) || !(snr_gain * snr_gain < sbr_factor)) {
    throw DomainError("background_ratio_for_snr_gain: need 1 < snr_gain^2 < sbr_factor");
  }
  // SNR gain at background ratio x: sqrt((1 + x) / (1 + x / f)), increasing in x.
  const auto gain = [&](double x) { return snr_from_sbr_change(1.0, x, sbr_factor / x); };
  double lo = 0.0;
  double hi = 1.0;
  while (gain(hi) < snr_gain) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid > 0.0 && gain(mid) < snr_gain ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double photons_required_ratio(double snr_ratio) {
  if (!(snr_ratio > 0.0)) throw DomainError("photons_required_ratio: snr_ratio must be > 0");
  return 1.0 / (snr_ratio * snr_ratio);
}

bool detection_decision(const SelectionOutcome& outcome, double k_sigma) {
  if (!(k_sigma > 0.0)) throw DomainError("detection_decision: k_sigma must be > 0");
  return outcome.snr >= k_sigma;
}

double purity_from_sbr(double sbr) noexcept { return sbr / (1.0 + sbr); }

double sbr_from_purity(double purity) noexcept { return purity / (1.0 - purity); }

}  // namespace coinclab
