#pragma once

// Background-to-signal density ratios of the two pair observables and their
// product. Y is background over signal: signal-like pairs have SMALL Y, and
// every Y-based selection keeps pairs strictly below the threshold.

#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "coinclab/coincidence.hpp"
#include "coinclab/histfit.hpp"

namespace coinclab {

/// Returned for ratios whose signal density underflows (more than 40 sigma
/// from the peak) or whose background model is not positive there.
inline constexpr double kSaturatedRatio = 1e300;

struct DiscriminantModel {
  SpectralFitParams spectral;
  TimeFitParams time;

  void validate() const;
};

/// norm / (sqrt(2 pi) sigma) * exp(-(x - mean)^2 / (2 sigma^2))
double gaussian_density(double x, double norm, double mean, double sigma) noexcept;

double y_lambda(const DiscriminantModel& model, double lambda_p) noexcept;
double y_delta_t(const DiscriminantModel& model, double delta_t) noexcept;
double y_combined(const DiscriminantModel& model, double lambda_p, double delta_t) noexcept;

struct YThreshold {
  double threshold;
};
struct TimeOnly {
  double threshold;
};
struct SpectralOnly {
  double threshold;
};
/// Rectangular window around the fitted peak (dT0, lambda0).
struct BoxCut {
  double time_halfwidth;
  double spectral_halfwidth;
};
using Selection = std::variant<YThreshold, BoxCut, TimeOnly, SpectralOnly>;

enum class Method : std::uint8_t { Combined, TimeOnly, SpectralOnly, BoxCut };
std::string_view method_label(Method m) noexcept;

bool passes(const DiscriminantModel& model, const Selection& selection, double lambda_p,
            double delta_t) noexcept;

/// Order-preserving filter. Throws DomainError for negative (or NaN)
/// thresholds and non-positive halfwidths; threshold 0 keeps nothing.
std::vector<PairRecord> apply_selection(std::span<const PairRecord> pairs,
                                        const DiscriminantModel& model, const Selection& selection);

/// Ratio a threshold-type method compares against its threshold. Not
/// defined for Method::BoxCut.
double method_statistic(const DiscriminantModel& model, Method method, double lambda_p,
                        double delta_t);

/// Smallest threshold t for which the fraction of true coincidences with
/// statistic < t reaches `target_efficiency`. Throws Error without true pairs.
double threshold_for_efficiency(std::span<const PairRecord> pairs, const DiscriminantModel& model,
                                double target_efficiency, Method method = Method::Combined);

/// Same, from precomputed true-pair statistics sorted ascending.
double threshold_from_sorted(std::span<const double> sorted_true_values, double target_efficiency);

Selection make_selection(Method method, double parameter, double box_time_halfwidth);

struct YSurfacePoint {
  double lambda_p;
  double delta_t;
  double y;
};

/// Y on the Cartesian grid lambda_axis x dt_axis (lambda-major).
std::vector<YSurfacePoint> y_surface(const DiscriminantModel& model,
                                     std::span<const double> lambda_axis,
                                     std::span<const double> dt_axis);

std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace coinclab
