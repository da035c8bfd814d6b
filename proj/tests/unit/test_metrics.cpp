#include <doctest.h>

#include <cmath>
#include <random>

#include "coinclab/errors.hpp"
#include "coinclab/metrics.hpp"

using namespace coinclab;

namespace {

DiscriminantModel model() {
  DiscriminantModel m;
  m.spectral = {1.0e4, 405.0, 0.36, 10.0, 405.0, 100.0};
  m.time = {1.0e4, 0.0, 7.55, 100.0, 500.0};
  return m;
}

std::vector<PairRecord> sample(std::size_t n_true, std::size_t n_bg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gl(405.0, 0.36), gt(0.0, 7.55);
  std::uniform_real_distribution<double> ul(402.0, 408.0), ut(-200.0, 200.0);
  std::vector<PairRecord> out;
  for (std::size_t i = 0; i < n_true + n_bg; ++i) {
    PairRecord p;
    const bool signal = i < n_true;
    p.delta_t = signal ? gt(rng) : ut(rng);
    p.lambda_p_rec = signal ? gl(rng) : ul(rng);
    p.pair_class = signal ? PairClass::TrueCoincidence : (i % 2 ? PairClass::Thermal : PairClass::SignalBackground);
    out.push_back(p);
  }
  return out;
}

MethodCurve curve_of(std::vector<std::pair<double, double>> eff_sbr) {
  MethodCurve c;
  for (auto [e, s] : eff_sbr) {
    CurvePoint p;
    p.outcome.efficiency = e;
    p.outcome.sbr = s;
    c.points.push_back(p);
  }
  return c;
}

}  // namespace

TEST_CASE("outcome arithmetic") {
  const auto a = outcome_from_counts(80, 20, 100);
  CHECK(*a.purity == doctest::Approx(0.8));
  CHECK(*a.sbr == doctest::Approx(4.0));
  CHECK(a.efficiency == doctest::Approx(0.8));
  CHECK_FALSE(a.efficiency_generated.has_value());

  const auto b = outcome_from_counts(100, 300, 200, 400);
  CHECK(b.snr == doctest::Approx(5.0));
  CHECK(*b.efficiency_generated == doctest::Approx(0.25));

  const auto c = outcome_from_counts(10, 0, 10);
  CHECK_FALSE(c.sbr.has_value());
  CHECK(*c.purity == 1.0);

  const auto d = outcome_from_counts(0, 0, 10);
  CHECK_FALSE(d.purity.has_value());
  CHECK(d.snr == 0.0);

  CHECK_THROWS_AS(outcome_from_counts(1, 1, 0), DomainError);

  std::vector<PairRecord> sel(5);
  sel[0].pair_class = PairClass::TrueCoincidence;
  sel[1].pair_class = PairClass::TrueCoincidence;
  sel[2].pair_class = PairClass::SignalMistag;
  sel[3].pair_class = PairClass::Thermal;
  const auto o = outcome(sel, 4);
  CHECK(o.s == 2);
  CHECK(o.b == 2);
  CHECK(o.efficiency == 0.5);
}

TEST_CASE("purity and SBR round-trip") {
  for (double sbr : {1e-6, 0.01, 0.5, 1.0, 4.0, 1e3}) {
    CHECK(std::abs(sbr_from_purity(purity_from_sbr(sbr)) - sbr) <= 1e-12 * std::max(1.0, sbr) * 10);
    CHECK(purity_from_sbr(sbr) == doctest::Approx(sbr / (1.0 + sbr)));
  }
}

TEST_CASE("SNR increases when b falls at fixed s") {
  double previous = 0.0;
  for (int b = 1000; b >= 0; b -= 100) {
    const double snr = outcome_from_counts(100, static_cast<std::uint64_t>(b), 100).snr;
    CHECK(snr > previous);
    previous = snr;
  }
}

TEST_CASE("detection_decision") {
  CHECK(detection_decision(outcome_from_counts(100, 300, 100), 2.0));
  CHECK_FALSE(detection_decision(outcome_from_counts(1, 99, 1), 2.0));
  SelectionOutcome eq;
  eq.snr = 2.0;
  CHECK(detection_decision(eq, 2.0));
  CHECK_THROWS_AS(detection_decision(eq, 0.0), DomainError);
}

TEST_CASE("SNR / photon-budget chain") {
  CHECK(snr_from_sbr_change(10.0, 5.0, 2.0) == doctest::Approx(1.0));
  CHECK(snr_from_sbr_change(1.0, 1.588, 1.26 / 1.588) == doctest::Approx(1.07).epsilon(0.005));
  CHECK(snr_from_sbr_change(1.0, 1e-9, 5.0 * 1e9) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(snr_from_sbr_change(0.0, 1.0, 1.0), DomainError);

  const double r = background_ratio_for_snr_gain(1.26, 1.07);
  // Closed form of (1 + r) / (1 + r / f) = g^2.
  const double g2 = 1.07 * 1.07;
  CHECK(r == doctest::Approx((g2 - 1.0) / (1.0 - g2 / 1.26)).epsilon(1e-9));
  CHECK(r == doctest::Approx(1.588).epsilon(0.01));
  CHECK_THROWS_AS(background_ratio_for_snr_gain(1.1, 1.07), DomainError);

  CHECK(photons_required_ratio(1.0) == 1.0);
  CHECK(photons_required_ratio(1.07) == doctest::Approx(0.873).epsilon(0.002));
  CHECK(photons_required_ratio(2.0) == 0.25);
  CHECK_THROWS_AS(photons_required_ratio(0.0), DomainError);
}

TEST_CASE("sweep: monotone, nested, widest point keeps every true pair") {
  const auto pairs = sample(2000, 6000, 1);
  const auto m = model();
  std::vector<double> grid;
  for (double t = 1e-4; t < 1e8; t *= 3.0) grid.push_back(t);
  for (Method method : {Method::Combined, Method::TimeOnly, Method::SpectralOnly}) {
    const auto curve = sweep(pairs, m, method, grid);
    CHECK(curve.method == method);
    REQUIRE(curve.points.size() == grid.size());
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].outcome.s >= curve.points[i - 1].outcome.s);
      CHECK(curve.points[i].outcome.b >= curve.points[i - 1].outcome.b);
      CHECK(curve.points[i].outcome.efficiency >= curve.points[i - 1].outcome.efficiency);
    }
    CHECK(curve.points.back().outcome.efficiency <= 1.0);
  }
  const auto huge = std::vector<double>{kSaturatedRatio * 2};
  CHECK(sweep(pairs, m, Method::Combined, huge).points[0].outcome.efficiency == 1.0);

  const auto box = sweep(pairs, m, Method::BoxCut, std::vector<double>{0.1, 0.5, 3.0});
  for (std::size_t i = 1; i < 3; ++i) CHECK(box.points[i].outcome.s >= box.points[i - 1].outcome.s);
  std::uint64_t in_time = 0;
  for (const auto& p : pairs) in_time += p.pair_class == PairClass::TrueCoincidence && std::abs(p.delta_t) <= 10.0;
  CHECK(box.points[2].outcome.s == in_time);

  CHECK_THROWS_AS(sweep(pairs, m, Method::Combined, std::vector<double>{}), DomainError);
}

TEST_CASE("sweep_efficiencies hits its targets and is reproducible") {
  const auto pairs = sample(2000, 6000, 2);
  const auto m = model();
  const std::vector<double> etas = {0.3, 0.5, 0.8, 0.95};
  SweepOptions options;
  options.generated_pairs = 4000;
  const auto a = sweep_efficiencies(pairs, m, Method::Combined, etas, options);
  const auto b = sweep_efficiencies(pairs, m, Method::Combined, etas, options);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    CHECK(a.points[i].outcome.efficiency >= etas[i]);
    CHECK(a.points[i].outcome.efficiency - etas[i] <= 1.0 / 2000.0);
    CHECK(*a.points[i].outcome.efficiency_generated == doctest::Approx(a.points[i].outcome.efficiency / 2.0));
    CHECK(a.points[i].parameter == b.points[i].parameter);
    CHECK(a.points[i].outcome.b == b.points[i].outcome.b);
  }
  CHECK_THROWS_AS(sweep_efficiencies(pairs, m, Method::BoxCut, etas), DomainError);

  // Combined at least as pure as either single variable at matched efficiency.
  const auto t = sweep_efficiencies(pairs, m, Method::TimeOnly, etas);
  const auto s = sweep_efficiencies(pairs, m, Method::SpectralOnly, etas);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    CHECK(*a.points[i].outcome.purity >= *t.points[i].outcome.purity - 0.02);
    CHECK(*a.points[i].outcome.purity >= *s.points[i].outcome.purity - 0.02);
  }
}

TEST_CASE("interpolate_sbr and sbr_improvement_at") {
  const auto c = curve_of({{0.2, 10.0}, {0.6, 6.0}, {1.0, 2.0}});
  CHECK(interpolate_sbr(c, 0.6) == 6.0);
  CHECK(interpolate_sbr(c, 0.8) == doctest::Approx(4.0));
  CHECK(interpolate_sbr(c, 0.2) == 10.0);
  CHECK_THROWS_AS(interpolate_sbr(c, 0.1), DomainError);
  CHECK_THROWS_AS(interpolate_sbr(c, 1.1), DomainError);
  CHECK(sbr_improvement_at(c, c, 0.8) == 0.0);
  const auto d = curve_of({{0.2, 5.0}, {1.0, 1.0}});
  CHECK(sbr_improvement_at(c, d, 0.6) == doctest::Approx(6.0 / 3.0 - 1.0));
}
