#pragma once

// 1-D histograms of dT and reconstructed pump wavelength, and the empirical
// signal+background models fitted to them:
//   time:     Gaussian(N, dT0, sigma) + C * exp(-|dT| / b)
//   spectral: Gaussian(N, lambda0, sigma) + A * |lambda - lambda_b0| + B
// Gaussian terms are normalized to a yield N (counts); background terms are
// counts per bin.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace coinclab {

struct Histogram1D {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double center(std::size_t i) const noexcept { return 0.5 * (edges[i] + edges[i + 1]); }
  double width(std::size_t i) const noexcept { return edges[i + 1] - edges[i]; }
  double lo() const noexcept { return edges.front(); }
  double hi() const noexcept { return edges.back(); }
  std::uint64_t entries() const noexcept;
  std::uint64_t in_range() const noexcept;

  /// Index of the bin containing x, or -1 outside [lo, hi]. Bins are
  /// left-closed; the last bin also includes hi.
  std::ptrdiff_t find_bin(double x) const noexcept;
  void fill(double x) noexcept;
};

/// Throws DomainError for fewer than two edges or non-increasing edges.
Histogram1D histogram(std::span<const double> values, std::vector<double> edges);

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

/// Edges of bins of width `width` centred on anchor + k*width, covering at
/// least [anchor - half_range, anchor + half_range].
std::vector<double> lattice_edges(double anchor, double width, double half_range);

struct TimeFitParams {
  double N = 0.0;  // signal yield
  double offset = 0.0;  // dT_s0, ns
  double sigma = 1.0;  // ns
  double C = 0.0;  // background amplitude at dT = 0, counts / bin
  double b = 1.0;  // background exponential scale, ns

  static constexpr std::size_t kSize = 5;
  static constexpr std::array<std::string_view, kSize> kNames = {"N", "dt0", "sigma", "C", "b"};
  enum Index : std::size_t { kN, kOffset, kSigma, kC, kB };

  std::array<double, kSize> to_array() const noexcept { return {N, offset, sigma, C, b}; }
  static TimeFitParams from_array(const std::array<double, kSize>& a) noexcept {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
  /// Throws ConfigError unless sigma > 0, b > 0, N >= 0, C >= 0.
  void validate() const;
};

struct SpectralFitParams {
  double N = 0.0;  // signal yield
  double center = 0.0;  // lambda_p0, nm
  double sigma = 1.0;  // nm
  double A = 0.0;  // background slope, counts / bin / nm
  double apex = 0.0;  // lambda_b0, nm
  double B = 0.0;  // background offset, counts / bin

  static constexpr std::size_t kSize = 6;
  static constexpr std::array<std::string_view, kSize> kNames = {"N", "lambda0", "sigma", "A", "lambda_b0", "B"};
  enum Index : std::size_t { kN, kCenter, kSigma, kA, kApex, kB };

  std::array<double, kSize> to_array() const noexcept { return {N, center, sigma, A, apex, B}; }
  static SpectralFitParams from_array(const std::array<double, kSize>& a) noexcept {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
  /// Throws ConfigError unless sigma > 0 and N >= 0.
  void validate() const;
  /// Background A|x - apex| + B is non-negative on [lo, hi].
  bool background_nonnegative(double lo, double hi) const noexcept;
};

/// Expected counts in a bin of width `bin_width` centred at x.
double time_model(const TimeFitParams& p, double x, double bin_width) noexcept;
double spectral_model(const SpectralFitParams& p, double x, double bin_width) noexcept;

struct FitQuality {
  double chi2 = 0.0;
  int ndf = 0;
  double reduced_chi2 = 0.0;
  int iterations = 0;
};

template <class Params>
struct FitResult {
  Params params;
  Params errors;  // 1-sigma; zero for fixed parameters
  FitQuality quality;
};

struct FitOptions {
  int max_iterations = 500;
  double param_tolerance = 1e-8;  // relative parameter change
  double cost_tolerance = 1e-10;  // relative cost change
  /// Parameters held at their initial value, indexed like kNames.
  std::vector<bool> fixed;
};

/// Poisson-weighted least squares (bin error max(1, sqrt(count))) over all
/// bins. Requires at least 10 non-empty bins (DomainError). Throws FitError
/// carrying the best parameters when the iteration budget is exhausted.
FitResult<TimeFitParams> fit_time_model(const Histogram1D& hist, const TimeFitParams& init,
                                        const FitOptions& options = {});
FitResult<SpectralFitParams> fit_spectral_model(const Histogram1D& hist,
                                                const SpectralFitParams& init,
                                                const FitOptions& options = {});

/// Starting values read off the histogram: mean at the mode, sigma from the
/// peak FWHM (floor: one bin), background from the outer 25% of bins.
/// Throws DomainError for an all-zero histogram.
TimeFitParams initial_time_params(const Histogram1D& hist);
SpectralFitParams initial_spectral_params(const Histogram1D& hist);

}  // namespace coinclab
