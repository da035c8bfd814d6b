#include "coinclab/discriminant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "coinclab/errors.hpp"

namespace coinclab {

namespace {

const double kLogSaturation = std::log(kSaturatedRatio);
constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kMaxPull = 40.0;

// background / (N/(sqrt(2 pi) sigma) * exp(-z^2/2)), evaluated in logs.
double ratio(double background, double norm, double mean, double sigma, double x) noexcept {
  const double z = (x - mean) / sigma;
  if (!(std::abs(z) <= kMaxPull) || background < 0.0 || !(norm > 0.0)) return kSaturatedRatio;
  if (background == 0.0) return 0.0;
  const double log_y = std::log(background) + std::log(kSqrt2Pi * sigma / norm) + 0.5 * z * z;
  if (log_y >= kLogSaturation) return kSaturatedRatio;
  return std::exp(log_y);
}

void require_threshold(double t) {
  if (!(t >= 0.0)) throw DomainError("selection threshold must be >= 0");
}

}  // namespace

void DiscriminantModel::validate() const {
  spectral.validate();
  time.validate();
}

double gaussian_density(double x, double norm, double mean, double sigma) noexcept {
  const double z = (x - mean) / sigma;
  return norm / (kSqrt2Pi * sigma) * std::exp(-0.5 * z * z);
}

double y_lambda(const DiscriminantModel& model, double lambda_p) noexcept {
  const SpectralFitParams& p = model.spectral;
  return ratio(p.A * std::abs(lambda_p - p.apex) + p.B, p.N, p.center, p.sigma, lambda_p);
}

double y_delta_t(const DiscriminantModel& model, double delta_t) noexcept {
  const TimeFitParams& p = model.time;
  return ratio(p.C * std::exp(-std::abs(delta_t) / p.b), p.N, p.offset, p.sigma, delta_t);
}

double y_combined(const DiscriminantModel& model, double lambda_p, double delta_t) noexcept {
  const double a = y_lambda(model, lambda_p);
  const double b = y_delta_t(model, delta_t);
  if (a >= kSaturatedRatio || b >= kSaturatedRatio) return kSaturatedRatio;
  return std::min(a * b, kSaturatedRatio);
}

std::string_view method_label(Method m) noexcept {
  switch (m) {
    case Method::Combined: return "combined";
    case Method::TimeOnly: return "time";
    case Method::SpectralOnly: return "spectral";
    case Method::BoxCut: return "box";
  }
  return "?";
}

bool passes(const DiscriminantModel& model, const Selection& selection, double lambda_p,
            double delta_t) noexcept {
  struct Visitor {
    const DiscriminantModel& m;
    double lambda_p;
    double delta_t;
    bool operator()(const YThreshold& s) const { return y_combined(m, lambda_p, delta_t) < s.threshold; }
    bool operator()(const TimeOnly& s) const { return y_delta_t(m, delta_t) < s.threshold; }
    bool operator()(const SpectralOnly& s) const { return y_lambda(m, lambda_p) < s.threshold; }
    bool operator()(const BoxCut& s) const {
      return std::abs(delta_t - m.time.offset) <= s.time_halfwidth &&
             std::abs(lambda_p - m.spectral.center) <= s.spectral_halfwidth;
    }
  };
  return std::visit(Visitor{model, lambda_p, delta_t}, selection);
}

std::vector<PairRecord> apply_selection(std::span<const PairRecord> pairs,
                                        const DiscriminantModel& model, const Selection& selection) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxCut>) {
          if (!(s.time_halfwidth > 0.0) || !(s.spectral_halfwidth > 0.0)) {
            throw DomainError("box cut halfwidths must be > 0");
          }
        } else {
          require_threshold(s.threshold);
        }
      },
      selection);
  std::vector<PairRecord> out;
  for (const auto& p : pairs) {
    if (passes(model, selection, p.lambda_p_rec, p.delta_t)) out.push_back(p);
  }
  return out;
}

double method_statistic(const DiscriminantModel& model, Method method, double lambda_p,
                        double delta_t) {
  switch (method) {
    case Method::Combined: return y_combined(model, lambda_p, delta_t);
    case Method::TimeOnly: return y_delta_t(model, delta_t);
    case Method::SpectralOnly: return y_lambda(model, lambda_p);
    case Method::BoxCut: break;
  }
  throw DomainError("method_statistic: box cuts have no scalar statistic");
}

double threshold_from_sorted(std::span<const double> sorted, double target_efficiency) {
  if (sorted.empty()) throw Error("threshold_for_efficiency: no true coincidences");
  if (!(target_efficiency > 0.0) || target_efficiency > 1.0) {
    throw DomainError("threshold_for_efficiency: target must lie in (0, 1]");
  }
  const auto n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(target_efficiency * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return std::nextafter(sorted[k - 1], std::numeric_limits<double>::infinity());
}

double threshold_for_efficiency(std::span<const PairRecord> pairs, const DiscriminantModel& model,
                                double target_efficiency, Method method) {
  std::vector<double> values;
  for (const auto& p : pairs) {
    if (p.pair_class == PairClass::TrueCoincidence) {
      values.push_back(method_statistic(model, method, p.lambda_p_rec, p.delta_t));
    }
  }
  std::sort(values.begin(), values.end());
  return threshold_from_sorted(values, target_efficiency);
}

Selection make_selection(Method method, double parameter, double box_time_halfwidth) {
  switch (method) {
    case Method::Combined: return YThreshold{parameter};
    case Method::TimeOnly: return TimeOnly{parameter};
    case Method::SpectralOnly: return SpectralOnly{parameter};
    case Method::BoxCut: return BoxCut{box_time_halfwidth, parameter};
  }
  throw DomainError("make_selection: unknown method");
}

std::vector<YSurfacePoint> y_surface(const DiscriminantModel& model,
                                     std::span<const double> lambda_axis,
                                     std::span<const double> dt_axis) {
  std::vector<YSurfacePoint> out;
  out.reserve(lambda_axis.size() * dt_axis.size());
  for (double l : lambda_axis) {
    for (double t : dt_axis) out.push_back({l, t, y_combined(model, l, t)});
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

}  // namespace coinclab
