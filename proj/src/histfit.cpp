#include "coinclab/histfit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "coinclab/errors.hpp"
#include "least_squares.hpp"

namespace coinclab {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kFwhmPerSigma = 2.3548200450309493;

// Gaussian yield term and its partial derivatives (dN, dmean, dsigma).
double gaussian_term(double N, double mean, double sigma, double x, double width, double* d) {
  const double z = (x - mean) / sigma;
  const double shape = width * kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
  const double g = N * shape;
  if (d) {
    d[0] = shape;
    d[1] = g * z / sigma;
    d[2] = g * (z * z - 1.0) / sigma;
  }
  return g;
}

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct BinnedData {
  std::vector<double> x;
  std::vector<double> width;
  std::vector<double> counts;
  std::vector<double> weights;
};

BinnedData binned(const Histogram1D& h) {
  std::size_t nonempty = 0;
  BinnedData d;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const auto c = static_cast<double>(h.counts[i]);
    if (c > 0.0) ++nonempty;
    d.x.push_back(h.center(i));
    d.width.push_back(h.width(i));
    d.counts.push_back(c);
    const double err = std::max(1.0, std::sqrt(c));
    d.weights.push_back(1.0 / (err * err));
  }
  if (nonempty < 10) {
    throw DomainError("fit: histogram needs at least 10 non-empty bins, has " + std::to_string(nonempty));
  }
  return d;
}

template <std::size_t K>
FitQuality quality_of(const detail::LsqResult& r, std::size_t points, const std::vector<bool>& fixed) {
  int n_free = 0;
  for (std::size_t k = 0; k < K; ++k) n_free += (k >= fixed.size() || !fixed[k]) ? 1 : 0;
  FitQuality q;
  q.chi2 = r.chi2;
  q.ndf = static_cast<int>(points) - n_free;
  q.reduced_chi2 = q.ndf > 0 ? r.chi2 / q.ndf : 0.0;
  q.iterations = r.iterations;
  return q;
}

template <class Params>
FitResult<Params> finish(const detail::LsqResult& r, std::size_t points, const FitOptions& options,
                         const char* which) {
  if (!r.converged) {
    throw FitError(std::string(which) + ": no convergence within " +
                       std::to_string(options.max_iterations) + " iterations",
                   r.params);
  }
  std::array<double, Params::kSize> values{};
  std::array<double, Params::kSize> errors{};
  std::copy(r.params.begin(), r.params.end(), values.begin());
  std::copy(r.errors.begin(), r.errors.end(), errors.begin());
  return {Params::from_array(values), Params::from_array(errors),
          quality_of<Params::kSize>(r, points, options.fixed)};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

struct PeakEstimate {
  std::size_t mode = 0;
  double mean = 0.0;
  double sigma = 0.0;
  double background = 0.0;
};

PeakEstimate estimate_peak(const Histogram1D& h) {
  if (h.bins() == 0 || std::all_of(h.counts.begin(), h.counts.end(), [](auto c) { return c == 0; })) {
    throw DomainError("initialization: histogram is empty");
  }
  PeakEstimate e;
  e.mode = static_cast<std::size_t>(std::max_element(h.counts.begin(), h.counts.end()) - h.counts.begin());
  e.mean = h.center(e.mode);

  const std::size_t n = h.bins();
  const std::size_t outer = std::max<std::size_t>(1, n / 8);
  std::vector<double> tails;
  for (std::size_t i = 0; i < outer; ++i) {
    tails.push_back(static_cast<double>(h.counts[i]));
    tails.push_back(static_cast<double>(h.counts[n - 1 - i]));
  }
  e.background = median(tails);

  const double peak = static_cast<double>(h.counts[e.mode]) - e.background;
  const double half = 0.5 * peak;
  const auto excess = [&](std::size_t i) { return static_cast<double>(h.counts[i]) - e.background; };
  // Walk out from the mode to the half-maximum crossings, interpolating
  // linearly between bin centres.
  double left = h.center(e.mode);
  for (std::size_t i = e.mode; i-- > 0;) {
    if (excess(i) < half) {
      const double f = (half - excess(i)) / std::max(excess(i + 1) - excess(i), 1e-300);
      left = h.center(i) + f * (h.center(i + 1) - h.center(i));
      break;
    }
    left = h.center(i);
  }
  double right = h.center(e.mode);
  for (std::size_t i = e.mode + 1; i < n; ++i) {
    if (excess(i) < half) {
      const double f = (excess(i - 1) - half) / std::max(excess(i - 1) - excess(i), 1e-300);
      right = h.center(i - 1) + f * (h.center(i) - h.center(i - 1));
      break;
    }
    right = h.center(i);
  }
  e.sigma = std::max((right - left) / kFwhmPerSigma, h.width(e.mode));
  return e;
}

double signal_excess(const Histogram1D& h, const PeakEstimate& e, auto background_at) {
  double excess = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (std::abs(h.center(i) - e.mean) <= 3.0 * e.sigma) {
      excess += static_cast<double>(h.counts[i]) - background_at(h.center(i));
    }
  }
  return std::max(excess, 1.0);
}

}  // namespace

std::uint64_t Histogram1D::entries() const noexcept { return in_range() + underflow + overflow; }

std::uint64_t Histogram1D::in_range() const noexcept {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

std::ptrdiff_t Histogram1D::find_bin(double x) const noexcept {
  if (!(x >= edges.front()) || x > edges.back()) return -1;
  if (x == edges.back()) return static_cast<std::ptrdiff_t>(counts.size()) - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return (it - edges.begin()) - 1;
}

void Histogram1D::fill(double x) noexcept {
  const auto i = find_bin(x);
  if (i >= 0) {
    ++counts[static_cast<std::size_t>(i)];
  } else if (x < edges.front()) {
    ++underflow;
  } else {
    ++overflow;  // NaN also lands here
  }
}

Histogram1D histogram(std::span<const double> values, std::vector<double> edges) {
  if (edges.size() < 2) throw DomainError("histogram: need at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw DomainError("histogram: edges must be strictly increasing");
  }
  Histogram1D h;
  h.counts.assign(edges.size() - 1, 0);
  h.edges = std::move(edges);
  for (double v : values) h.fill(v);
  return h;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw DomainError("uniform_edges: need bins > 0 and hi > lo");
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  return e;
}

std::vector<double> lattice_edges(double anchor, double width, double half_range) {
  if (!(width > 0.0) || !(half_range > 0.0)) throw DomainError("lattice_edges: width and range must be > 0");
  const auto k = static_cast<long long>(std::ceil(half_range / width - 0.5));
  std::vector<double> e;
  e.reserve(static_cast<std::size_t>(2 * k + 2));
  for (long long i = -k; i <= k + 1; ++i) {
    e.push_back(anchor + (static_cast<double>(i) - 0.5) * width);
  }
  return e;
}

void TimeFitParams::validate() const {
  if (!(sigma > 0.0) || !(b > 0.0) || !(N >= 0.0) || !(C >= 0.0)) {
    throw ConfigError("time model parameters require sigma > 0, b > 0, N >= 0, C >= 0");
  }
}

void SpectralFitParams::validate() const {
  if (!(sigma > 0.0) || !(N >= 0.0)) {
    throw ConfigError("spectral model parameters require sigma > 0, N >= 0");
  }
}

bool SpectralFitParams::background_nonnegative(double lo, double hi) const noexcept {
  const double at_lo = A * std::abs(lo - apex) + B;
  const double at_hi = A * std::abs(hi - apex) + B;
  const double at_apex = (apex >= lo && apex <= hi) ? B : at_lo;
  return at_lo >= 0.0 && at_hi >= 0.0 && at_apex >= 0.0;
}

double time_model(const TimeFitParams& p, double x, double bin_width) noexcept {
  return gaussian_term(p.N, p.offset, p.sigma, x, bin_width, nullptr) + p.C * std::exp(-std::abs(x) / p.b);
}

double spectral_model(const SpectralFitParams& p, double x, double bin_width) noexcept {
  return gaussian_term(p.N, p.center, p.sigma, x, bin_width, nullptr) + p.A * std::abs(x - p.apex) + p.B;
}

FitResult<TimeFitParams> fit_time_model(const Histogram1D& hist, const TimeFitParams& init,
                                        const FitOptions& options) {
  const BinnedData d = binned(hist);
  const double min_width = *std::min_element(d.width.begin(), d.width.end());
  detail::LsqProblem pb;
  pb.n_params = TimeFitParams::kSize;
  pb.x = d.x;
  pb.data = d.counts;
  pb.weights = d.weights;
  pb.eval = [&](std::span<const double> p, std::size_t i, std::span<double> g) {
    const double x = d.x[i];
    const double gauss = gaussian_term(p[0], p[1], p[2], x, d.width[i], g.data());
    const double e = std::exp(-std::abs(x) / p[4]);
    g[3] = e;
    g[4] = p[3] * e * std::abs(x) / (p[4] * p[4]);
    return gauss + p[3] * e;
  };
  pb.project = [&](std::span<double> p) {
    p[0] = std::max(p[0], 0.0);
    p[2] = std::max(p[2], 1e-3 * min_width);
    p[3] = std::max(p[3], 0.0);
    p[4] = std::max(p[4], 1e-3 * min_width);
  };
  const auto a = init.to_array();
  const auto r = detail::levenberg_marquardt(
      pb, {a.begin(), a.end()},
      {options.max_iterations, options.param_tolerance, options.cost_tolerance, options.fixed});
  return finish<TimeFitParams>(r, d.x.size(), options, "fit_time_model");
}

FitResult<SpectralFitParams> fit_spectral_model(const Histogram1D& hist,
                                                const SpectralFitParams& init,
                                                const FitOptions& options) {
  const BinnedData d = binned(hist);
  const double min_width = *std::min_element(d.width.begin(), d.width.end());
  detail::LsqProblem pb;
  pb.n_params = SpectralFitParams::kSize;
  pb.x = d.x;
  pb.data = d.counts;
  pb.weights = d.weights;
  pb.eval = [&](std::span<const double> p, std::size_t i, std::span<double> g) {
    const double x = d.x[i];
    const double gauss = gaussian_term(p[0], p[1], p[2], x, d.width[i], g.data());
    const double dist = std::abs(x - p[4]);
    g[3] = dist;
    // Subgradient 0 exactly at the kink.
    g[4] = -p[3] * sign0(x - p[4]);
    g[5] = 1.0;
    return gauss + p[3] * dist + p[5];
  };
  pb.project = [&](std::span<double> p) {
    p[0] = std::max(p[0], 0.0);
    p[2] = std::max(p[2], 1e-3 * min_width);
  };
  const auto a = init.to_array();
  const auto r = detail::levenberg_marquardt(
      pb, {a.begin(), a.end()},
      {options.max_iterations, options.param_tolerance, options.cost_tolerance, options.fixed});
  return finish<SpectralFitParams>(r, d.x.size(), options, "fit_spectral_model");
}

TimeFitParams initial_time_params(const Histogram1D& hist) {
  const PeakEstimate e = estimate_peak(hist);
  TimeFitParams p;
  p.offset = e.mean;
  p.sigma = e.sigma;

  // Exponential background from a log-linear regression on the sidebands.
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double x = hist.center(i);
    const auto c = static_cast<double>(hist.counts[i]);
    if (std::abs(x - e.mean) <= 5.0 * e.sigma || c <= 0.0) continue;
    const double ax = std::abs(x);
    const double y = std::log(c);
    sw += c;
    sx += c * ax;
    sy += c * y;
    sxx += c * ax * ax;
    sxy += c * ax * y;
    ++used;
  }
  const double span = hist.hi() - hist.lo();
  const double denom = sw * sxx - sx * sx;
  if (used >= 4 && denom > 0.0) {
    const double slope = (sw * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / sw;
    p.b = slope < 0.0 ? std::min(-1.0 / slope, 10.0 * span) : 10.0 * span;
    p.C = slope < 0.0 ? std::exp(intercept) : e.background;
  } else {
    p.b = span;
    p.C = std::max(e.background, 0.0);
  }
  p.N = signal_excess(hist, e, [&](double x) { return p.C * std::exp(-std::abs(x) / p.b); });
  return p;
}

SpectralFitParams initial_spectral_params(const Histogram1D& hist) {
  const PeakEstimate e = estimate_peak(hist);
  SpectralFitParams p;
  p.center = e.mean;
  p.sigma = e.sigma;
  p.apex = e.mean;
  p.A = 0.0;
  p.B = e.background;
  p.N = signal_excess(hist, e, [&](double) { return p.B; });
  return p;
}

}  // namespace coinclab
