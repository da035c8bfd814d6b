#include <doctest.h>

#include <cmath>
#include <random>

#include "coinclab/errors.hpp"
#include "coinclab/histfit.hpp"
#include "oracles.hpp"

using namespace coinclab;

namespace {

// Generator-as-oracle: bin contents drawn (or set exactly) from the model.
template <class Model>
Histogram1D synthesize(std::vector<double> edges, Model model, std::uint64_t seed, bool exact = false) {
  Histogram1D h;
  h.counts.assign(edges.size() - 1, 0);
  h.edges = std::move(edges);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double mu = model(h.center(i), h.width(i));
    if (exact) {
      h.counts[i] = static_cast<std::uint64_t>(std::llround(mu));
    } else {
      h.counts[i] = mu > 0.0 ? std::poisson_distribution<std::uint64_t>(mu)(rng) : 0;
    }
  }
  return h;
}

Histogram1D time_hist(const TimeFitParams& p, std::uint64_t seed, bool exact = false) {
  return synthesize(uniform_edges(-200.0, 200.0, 200), [&](double x, double w) { return time_model(p, x, w); },
                    seed, exact);
}

Histogram1D spectral_hist(const SpectralFitParams& p, std::uint64_t seed, double shift = 0.0) {
  return synthesize(uniform_edges(402.0 + shift, 408.0 + shift, 300),
                    [&](double x, double w) { return spectral_model(p, x, w); }, seed);
}

const TimeFitParams kTime{1.0e4, 0.0, 7.55, 200.0, 100.0};
const SpectralFitParams kSpectral{1.0e4, 405.0, 0.36, 15.0, 405.0, 40.0};

}  // namespace

TEST_CASE("histogram binning rules") {
  const auto empty = histogram(std::vector<double>{}, {0.0, 1.0, 2.0});
  CHECK(empty.counts == std::vector<std::uint64_t>{0, 0});
  CHECK(histogram(std::vector<double>{0.5}, {0.0, 1.0, 2.0}).counts == std::vector<std::uint64_t>{1, 0});
  CHECK(histogram(std::vector<double>{2.0}, {0.0, 1.0, 2.0}).counts == std::vector<std::uint64_t>{0, 1});
  CHECK(histogram(std::vector<double>{1.0}, {0.0, 1.0, 2.0}).counts == std::vector<std::uint64_t>{0, 1});

  const auto h = histogram(std::vector<double>{-1.0, 0.0, 0.3, 2.5, 1.9}, {0.0, 1.0, 2.0});
  CHECK(h.underflow == 1);
  CHECK(h.overflow == 1);
  CHECK(h.in_range() == 3);
  CHECK(h.entries() == 5);

  CHECK_THROWS_AS(histogram(std::vector<double>{}, {}), DomainError);
  CHECK_THROWS_AS(histogram(std::vector<double>{}, {1.0}), DomainError);
  CHECK_THROWS_AS(histogram(std::vector<double>{}, {0.0, 0.0}), DomainError);
}

TEST_CASE("lattice_edges centre bins on the lattice") {
  const auto e = lattice_edges(0.0, 1.5625, 200.0);
  const auto h = histogram(std::vector<double>{0.0, 1.5625, -3.125}, e);
  CHECK(h.in_range() == 3);
  CHECK(h.lo() <= -200.0);
  CHECK(h.hi() >= 200.0);
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double k = h.center(i) / 1.5625;
    CHECK(std::abs(k - std::round(k)) < 1e-9);
  }
}

TEST_CASE("fit_time_model recovers the generating parameters") {
  SUBCASE("exact synthesis") {
    const auto h = time_hist(kTime, 0, true);
    const auto fit = fit_time_model(h, initial_time_params(h));
    CHECK(fit.params.sigma == doctest::Approx(7.55).epsilon(0.005));
    CHECK(fit.params.b == doctest::Approx(100.0).epsilon(0.01));
  }
  SUBCASE("Poisson synthesis") {
    const auto h = time_hist(kTime, 1);
    const auto fit = fit_time_model(h, initial_time_params(h));
    CHECK(fit.params.sigma == doctest::Approx(7.55).epsilon(0.02));
    CHECK(std::abs(fit.params.N - kTime.N) < 4.0 * fit.errors.N);
    CHECK(std::abs(fit.params.b - kTime.b) < 4.0 * fit.errors.b);
    CHECK(fit.quality.ndf == 195);
    CHECK(fit.quality.reduced_chi2 >= 0.7);
    CHECK(fit.quality.reduced_chi2 <= 1.3);
  }
}

TEST_CASE("fit_time_model limits") {
  SUBCASE("zero background: C consistent with 0") {
    const auto h = time_hist({2.0e4, 1.0, 7.55, 0.0, 30.0}, 2);
    TimeFitParams init = initial_time_params(h);
    init.C = 1.0;
    const auto fit = fit_time_model(h, init);
    CHECK(fit.params.C <= 3.0 * fit.errors.C + 1e-9);
  }
  SUBCASE("pure background: N consistent with 0") {
    const auto h = time_hist({0.0, 0.0, 7.55, 50.0, 60.0}, 3);
    TimeFitParams init{100.0, 0.0, 7.55, 40.0, 50.0};
    const auto fit = fit_time_model(h, init);
    CHECK(fit.params.N <= 3.0 * fit.errors.N + 1e-9);
    CHECK(fit.params.b == doctest::Approx(60.0).epsilon(0.1));
  }
}

TEST_CASE("fit_spectral_model recovers the generating parameters") {
  const auto h = spectral_hist(kSpectral, 4);
  const auto fit = fit_spectral_model(h, initial_spectral_params(h));
  CHECK(fit.params.sigma == doctest::Approx(0.36).epsilon(0.02));
  CHECK(fit.params.center == doctest::Approx(405.0).epsilon(1e-4));
  CHECK(fit.quality.reduced_chi2 >= 0.7);
  CHECK(fit.quality.reduced_chi2 <= 1.3);

  SUBCASE("tent-shaped background (A < 0)") {
    const SpectralFitParams tent{1.0e4, 405.0, 0.36, -10.0, 405.2, 60.0};
    const auto ht = spectral_hist(tent, 5);
    const auto ft = fit_spectral_model(ht, initial_spectral_params(ht));
    CHECK(ft.params.sigma == doctest::Approx(0.36).epsilon(0.03));
    CHECK(std::abs(ft.params.A - tent.A) < 4.0 * ft.errors.A);
  }
  SUBCASE("flat background: A consistent with 0") {
    const SpectralFitParams flat{1.0e4, 405.0, 0.36, 0.0, 405.0, 40.0};
    const auto hf = spectral_hist(flat, 6);
    const auto ff = fit_spectral_model(hf, initial_spectral_params(hf));
    CHECK(std::abs(ff.params.A) < 3.0 * ff.errors.A);
    CHECK(ff.params.B == doctest::Approx(40.0).epsilon(0.05));
  }
}

TEST_CASE("fit_spectral_model symmetries") {
  const SpectralFitParams p{1.0e4, 405.0, 0.36, 12.0, 405.0, 30.0};
  const auto h = spectral_hist(p, 7);
  const auto base = fit_spectral_model(h, initial_spectral_params(h));

  SUBCASE("mirroring the data about the apex leaves the apex in place") {
    Histogram1D mirrored = h;
    std::reverse(mirrored.counts.begin(), mirrored.counts.end());
    const auto fit = fit_spectral_model(mirrored, initial_spectral_params(mirrored));
    CHECK(fit.params.apex == doctest::Approx(810.0 - base.params.apex).epsilon(1e-6));
    CHECK(std::abs(fit.params.apex - 405.0) < 4.0 * fit.errors.apex);
    CHECK(fit.params.sigma == doctest::Approx(base.params.sigma).epsilon(1e-5));
  }
  SUBCASE("translation equivariance") {
    const double c = 1.75;
    Histogram1D shifted = h;
    for (auto& e : shifted.edges) e += c;
    const auto fit = fit_spectral_model(shifted, initial_spectral_params(shifted));
    CHECK(fit.params.center - base.params.center == doctest::Approx(c).epsilon(1e-6));
    CHECK(fit.params.apex - base.params.apex == doctest::Approx(c).epsilon(1e-5));
    CHECK(fit.params.sigma == doctest::Approx(base.params.sigma).epsilon(1e-5));
    CHECK(fit.params.N == doctest::Approx(base.params.N).epsilon(1e-5));
    CHECK(fit.params.A == doctest::Approx(base.params.A).epsilon(1e-4));
    CHECK(fit.params.B == doctest::Approx(base.params.B).epsilon(1e-4));
  }
}

TEST_CASE("parameter scatter shrinks with statistics") {
  const auto scatter = [](double scale) {
    std::vector<double> sigmas;
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
      TimeFitParams p = kTime;
      p.N *= scale;
      p.C *= scale;
      const auto h = time_hist(p, seed);
      sigmas.push_back(fit_time_model(h, initial_time_params(h)).params.sigma);
    }
    return oracle::stddev(sigmas);
  };
  const double s1 = scatter(1.0);
  const double s2 = scatter(2.0);
  const double s4 = scatter(4.0);
  CHECK(s2 < s1);
  CHECK(s4 / s1 < 0.8);  // expected 0.5
  CHECK(s4 / s1 > 0.3);
}

TEST_CASE("fit failures") {
  const auto h = time_hist(kTime, 8);
  FitOptions tight;
  tight.max_iterations = 1;
  TimeFitParams far{1.0, 50.0, 1.0, 1.0, 1.0};
  try {
    (void)fit_time_model(h, far, tight);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.best_params().size() == TimeFitParams::kSize);
  }

  const auto sparse = histogram(std::vector<double>{0.0, 1.0, 2.0}, uniform_edges(-10, 10, 20));
  CHECK_THROWS_AS(fit_time_model(sparse, kTime), DomainError);
}

TEST_CASE("fixed parameters stay at their initial values") {
  const auto h = time_hist(kTime, 9);
  FitOptions options;
  options.fixed = {false, true, false, false, false};
  TimeFitParams init = initial_time_params(h);
  init.offset = 0.25;
  const auto fit = fit_time_model(h, init, options);
  CHECK(fit.params.offset == 0.25);
  CHECK(fit.errors.offset == 0.0);
  CHECK(fit.quality.ndf == 196);
}

TEST_CASE("default initialization") {
  SUBCASE("single spike") {
    const auto h = histogram(std::vector<double>(50, 3.1), uniform_edges(0.0, 10.0, 20));
    const auto p = initial_spectral_params(h);
    CHECK(p.center == doctest::Approx(3.25));
    CHECK(p.sigma == doctest::Approx(0.5));
    CHECK(p.N > 0.0);
  }
  SUBCASE("flat histogram") {
    Histogram1D h;
    h.edges = uniform_edges(400.0, 410.0, 100);
    h.counts.assign(100, 25);
    const auto p = initial_spectral_params(h);
    CHECK(p.B == doctest::Approx(25.0));
    CHECK(p.N <= 1.0);
  }
  SUBCASE("paper-shaped dT histogram: init within 50% of the fit") {
    const auto h = time_hist({5.0e4, 0.0, 7.55, 40.0, 700.0}, 10);
    const auto init = initial_time_params(h);
    const auto fit = fit_time_model(h, init).params;
    CHECK(std::abs(init.offset - fit.offset) < 0.5 * fit.sigma);
    for (auto [a, b] : {std::pair{init.N, fit.N}, {init.sigma, fit.sigma}, {init.C, fit.C}, {init.b, fit.b}}) {
      CHECK(std::abs(a - b) <= 0.5 * std::abs(b));
    }
  }
  SUBCASE("all-zero histogram is an error") {
    Histogram1D h;
    h.edges = uniform_edges(0.0, 1.0, 10);
    h.counts.assign(10, 0);
    CHECK_THROWS_AS(initial_time_params(h), DomainError);
    CHECK_THROWS_AS(initial_spectral_params(h), DomainError);
  }
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(kTime.validate());
  CHECK_THROWS_AS((TimeFitParams{1.0, 0.0, 0.0, 1.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((TimeFitParams{1.0, 0.0, 1.0, -1.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((SpectralFitParams{1.0, 405.0, -1.0, 0.0, 405.0, 1.0}.validate()), ConfigError);
  CHECK((SpectralFitParams{1.0, 405.0, 0.36, -10.0, 405.0, 30.0}.background_nonnegative(402.0, 408.0)));
  CHECK_FALSE((SpectralFitParams{1.0, 405.0, 0.36, -10.0, 405.0, 20.0}.background_nonnegative(402.0, 408.0)));
}
