#pragma once

// Selection figures of merit and efficiency/purity sweeps.
//   purity = s / (s + b),  SBR = s / b,  SNR = s / sqrt(s + b)

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coinclab/discriminant.hpp"

namespace coinclab {

struct SelectionOutcome {
  std::uint64_t s = 0;  // true coincidences kept
  std::uint64_t b = 0;  // everything else kept
  double efficiency = 0.0;  // s / true coincidences found by pairing
  std::optional<double> efficiency_generated;  // s / all generated pairs
  std::optional<double> purity;  // absent when s + b == 0
  std::optional<double> sbr;  // absent when b == 0
  double snr = 0.0;
};

SelectionOutcome outcome_from_counts(std::uint64_t s, std::uint64_t b, std::uint64_t total_true,
                                     std::optional<std::uint64_t> generated_pairs = {});

/// Counts classes of `selected`; pairs without truth are ignored. Throws
/// DomainError when total_true == 0.
SelectionOutcome outcome(std::span<const PairRecord> selected, std::uint64_t total_true,
                         std::optional<std::uint64_t> generated_pairs = {});

struct CurvePoint {
  double parameter = 0.0;
  SelectionOutcome outcome;
};

struct MethodCurve {
  Method method = Method::Combined;
  std::vector<CurvePoint> points;

  std::string label() const { return std::string(method_label(method)); }
};

struct SweepOptions {
  double box_time_halfwidth = 10.0;  // ns
  std::optional<std::uint64_t> generated_pairs;
};

/// Outcome at every grid value: thresholds for the ratio methods, spectral
/// halfwidths (nm) for the box cut. Requires truth-tagged pairs; throws
/// DomainError for an empty grid.
MethodCurve sweep(std::span<const PairRecord> pairs, const DiscriminantModel& model, Method method,
                  std::span<const double> grid, const SweepOptions& options = {});

/// Ratio-method sweep on thresholds matched to the given true-pair
/// efficiencies.
MethodCurve sweep_efficiencies(std::span<const PairRecord> pairs, const DiscriminantModel& model,
                               Method method, std::span<const double> efficiencies,
                               const SweepOptions& options = {});

/// SBR at efficiency `eta`, linear in efficiency between curve points.
/// Throws DomainError when eta is outside the curve's efficiency range.
double interpolate_sbr(const MethodCurve& curve, double eta);

/// SBR_a / SBR_b - 1 at common efficiency `eta`.
double sbr_improvement_at(const MethodCurve& a, const MethodCurve& b, double eta);

/// SNR ratio after the background changes to s / new_sbr at fixed s.
double snr_from_sbr_change(double s, double b, double new_sbr);

/// Background-to-signal ratio b/s for which multiplying SBR by
/// `sbr_factor` multiplies SNR by `snr_gain`. Bisection.
double background_ratio_for_snr_gain(double sbr_factor, double snr_gain);

/// Photons needed for equal SNR, relative to before: 1 / snr_ratio^2.
double photons_required_ratio(double snr_ratio);

/// snr >= k_sigma.
bool detection_decision(const SelectionOutcome& outcome, double k_sigma);

double purity_from_sbr(double sbr) noexcept;
double sbr_from_purity(double purity) noexcept;

}  // namespace coinclab
