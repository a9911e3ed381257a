#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "locrom/atlas.hpp"

using namespace locrom;

namespace {

FunctionErrorModel distance_model(double slope, double offset) {
  return FunctionErrorModel(
      [=](double mu0, double mu, int) { return slope * std::abs(mu0 - mu) + offset; });
}

// Dense outward scan written independently of the library walk.
FeasibleInterval brute_force(const ErrorModel& m, double mu, int k, double thr, double step,
                             double radius) {
  const int n = static_cast<int>(std::floor(radius / step + 1e-9));
  const double lt = std::log(thr);
  double right = mu, left = mu;
  for (int i = 1; i <= n; ++i) {
    const double p = mu + i * step;
    if (m.log_error(p, mu, k) >= lt) break;
    right = p;
  }
  for (int i = 1; i <= n; ++i) {
    const double p = mu - i * step;
    if (p <= 0.0 || m.log_error(p, mu, k) >= lt) break;
    left = p;
  }
  return {mu, left, right, thr, k};
}

void check_map(const ErrorModel& model, const ParametricMap& map) {
  const auto& iv = map.intervals;
  REQUIRE(!iv.empty());
  CHECK(iv.front().d_right >= map.config.B);
  CHECK(iv.back().d_left <= map.config.A);
  for (std::size_t j = 0; j < iv.size(); ++j) {
    CHECK(iv[j].d_left <= iv[j].center_mu);
    CHECK(iv[j].center_mu <= iv[j].d_right);
    if (j > 0) {
      CHECK(iv[j].d_right >= iv[j - 1].d_left);
      CHECK(iv[j].threshold >= iv[j - 1].threshold);
    }
    // Every probe inside the interval satisfies its threshold.
    const double step = map.config.delta_s;
    for (double p = iv[j].center_mu; p <= iv[j].d_right + 1e-12; p += step) {
      CHECK(model.log_error(p, iv[j].center_mu, iv[j].basis_dim) < std::log(iv[j].threshold));
    }
    for (double p = iv[j].center_mu; p >= iv[j].d_left - 1e-12; p -= step) {
      CHECK(model.log_error(p, iv[j].center_mu, iv[j].basis_dim) < std::log(iv[j].threshold));
    }
  }
}

}  // namespace

TEST_CASE("feasible interval of a linear distance model") {
  const auto m = distance_model(10.0, -3.0);
  const FeasibleInterval iv = find_feasible_interval(m, 0.5, 9, std::exp(-1.0), 1e-3, 0.5);
  CHECK(std::abs(iv.d_right - 0.7) <= 1e-3 + 1e-12);
  CHECK(std::abs(iv.d_left - 0.3) <= 1e-3 + 1e-12);
  CHECK(iv.basis_dim == 9);
}

TEST_CASE("feasible interval saturates at the search radius") {
  const auto m = distance_model(0.0, -10.0);
  const FeasibleInterval iv = find_feasible_interval(m, 0.5, 4, 1e-2, 1e-3, 0.2);
  CHECK(iv.d_right == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(iv.d_left == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("feasible interval matches a dense scan on a bumpy model") {
  const FunctionErrorModel bumpy([](double mu0, double mu, int k) {
    return 30.0 * std::abs(mu0 - mu) + std::sin(80.0 * mu0) - 0.1 * k - 3.0;
  });
  for (double mu : {0.2, 0.45, 0.7}) {
    const FeasibleInterval got = find_feasible_interval(bumpy, mu, 6, 0.2, 1e-3, 0.4);
    const FeasibleInterval want = brute_force(bumpy, mu, 6, 0.2, 1e-3, 0.4);
    CHECK(got.d_left == want.d_left);
    CHECK(got.d_right == want.d_right);
  }
}

TEST_CASE("infeasible center and argument checks") {
  const auto m = distance_model(1.0, 0.0);
  CHECK_THROWS_AS(find_feasible_interval(m, 0.5, 9, 0.5, 1e-3, 0.1), InfeasibleCenter);
  CHECK_THROWS_AS(find_feasible_interval(m, 0.5, 9, -1.0, 1e-3, 0.1), Error);
  // Probes at or below zero viscosity always violate.
  CHECK(violates(distance_model(0.0, -50.0), 0.0, 0.1, 4, 0.0));
}

TEST_CASE("map of a distance model is a uniform tiling") {
  // log eps = 50 |mu0 - mu| against threshold e^2.6: ten probes of 0.005
  // fit on each side, the next center moves by 1.4 * 10 * 0.005 = 0.07.
  const auto m = distance_model(50.0, 0.0);
  MapConfig c;
  c.eps0 = std::exp(2.6);
  c.mu_start = 0.963;
  const ParametricMap map = build_map(m, c);
  const double radius = 0.05, stride = 0.07;
  const int expected = 1 + static_cast<int>(std::ceil((c.mu_start - radius - c.A) / stride));
  CHECK(static_cast<int>(map.intervals.size()) == expected);
  for (std::size_t j = 0; j < map.intervals.size(); ++j) {
    CHECK(map.intervals[j].center_mu == doctest::Approx(c.mu_start - stride * j).epsilon(1e-9));
    CHECK(map.intervals[j].threshold == c.eps0);
  }
  check_map(m, map);
}

TEST_CASE("permissive threshold covers a short domain at once") {
  const auto m = distance_model(1.0, -10.0);
  MapConfig c;
  c.A = 0.9;
  c.B = 1.0;
  c.mu_start = 0.95;
  const ParametricMap map = build_map(m, c);
  CHECK(map.intervals.size() == 1);
  check_map(m, map);
}

TEST_CASE("thresholds escalate where the model gets harder") {
  const FunctionErrorModel m([](double mu0, double mu, int) {
    return 40.0 * std::abs(mu0 - mu) + 3.0 * (1.0 - mu) + std::log(0.005);
  });
  const ParametricMap map = build_map(m, MapConfig{});
  check_map(m, map);
  CHECK(map.intervals.back().threshold > map.intervals.front().threshold);
}

TEST_CASE("iteration cap reports the partial map") {
  const FunctionErrorModel m([](double mu0, double mu, int) {
    return 40.0 * std::abs(mu0 - mu) + 3.0 * (1.0 - mu) + std::log(0.005);
  });
  MapConfig c;
  c.max_iterations = 3;
  try {
    build_map(m, c);
    FAIL("expected MapIncomplete");
  } catch (const MapIncomplete& e) {
    CHECK(e.partial().intervals.size() <= 3);
  }
  MapConfig bad;
  bad.beta2 = 1.5;
  CHECK_THROWS_AS(build_map(m, bad), Error);
}

TEST_CASE("basis ranking") {
  const auto m = distance_model(1.0, 0.0);
  const std::vector<double> cands{0.1, 0.2, 0.3, 0.35, 0.4, 0.5};
  const auto r = rank_bases(m, 0.35, cands, 12);
  CHECK(r.front().mu == 0.35);

  const std::vector<double> one{0.8};
  CHECK(rank_bases(m, 0.35, one, 12).front().mu == 0.8);

  // Monotone transforms keep the order; ties go to the closer, then smaller mu.
  const FunctionErrorModel cubed([](double mu0, double mu, int) {
    return std::pow(std::abs(mu0 - mu), 3) * 7.0 + 1.0;
  });
  const auto rc = rank_bases(cubed, 0.35, cands, 12);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(rc[i].mu == r[i].mu);

  const FunctionErrorModel flat([](double, double, int) { return 0.0; });
  const std::vector<double> tied{0.5, 0.2, 0.3, 0.4};
  const auto rt = rank_bases(flat, 0.35, tied, 12);
  CHECK(rt[0].mu == 0.3);
  CHECK(rt[1].mu == 0.4);
  CHECK(rt[2].mu == 0.2);
  CHECK(rt[3].mu == 0.5);
}

TEST_CASE("dimension prediction") {
  // Monotone model: more accuracy needs more modes.
  const DimensionModel dm = [](double mu, double log_eps) { return 2.0 - 0.8 * log_eps - mu; };
  int previous = kMaxBasisDim + 1;
  for (double le = -14.0; le <= 0.0; le += 0.5) {
    const int k = predict_dimension(dm, 0.4, le);
    CHECK(k <= previous);
    CHECK(k >= kMinBasisDim);
    CHECK(k <= kMaxBasisDim);
    previous = k;
  }
  CHECK(predict_dimension(dm, 0.4, -100.0) == 15);
  CHECK(predict_dimension(dm, 0.4, 100.0) == 4);
  CHECK(predict_dimension([](double, double) { return 7.49; }, 0.0, 0.0) == 7);
  CHECK(predict_dimension([](double, double) { return 7.5; }, 0.0, 0.0) == 8);
}

TEST_CASE("trained dimension model reproduces its training samples") {
  Dataset d;
  d.feature_names = {"mu", "log_eps"};
  std::vector<std::array<double, 3>> rows;
  for (double mu : {0.2, 0.5, 0.8}) {
    for (int k = 4; k <= 10; ++k) rows.push_back({mu, -1.0 - 1.1 * k - mu, static_cast<double>(k)});
  }
  d.features.resize(static_cast<int>(rows.size()), 2);
  d.targets.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.features.row(i) << rows[i][0], rows[i][1];
    d.targets(i) = rows[i][2];
  }
  SurrogateSettings s;
  s.ann.hidden_layers = 2;
  s.ann.hidden_width = 10;
  s.ann.train.epochs = 2000;
  s.ann.train.validation_fraction = 0.0;
  const Surrogate model = Surrogate::fit(d, s, 3);
  const DimensionModel dm = dimension_model(model);
  for (const auto& r : rows) CHECK(predict_dimension(dm, r[0], r[1]) == static_cast<int>(r[2]));
}

TEST_CASE("spectrum baseline") {
  constexpr auto tail = SpectrumRule::tail;
  const Vector sharp{{1.0, 1e-12, 1e-13}};
  CHECK(spectrum_dimension_baseline(sharp, 1e-3).k == 1);
  CHECK(spectrum_dimension_baseline(sharp, 1e-3, tail).k == 1);

  Vector geometric(20);
  for (int i = 0; i < 20; ++i) geometric(i) = std::pow(2.0, -(i + 1));
  // First discarded value after k modes: 2^-(k+1).
  CHECK(spectrum_dimension_baseline(geometric, 0.0625).k == 3);
  CHECK(spectrum_dimension_baseline(geometric, 0.062).k == 4);
  // Tails after keeping k modes: 2^-k minus a 2^-20 remainder.
  CHECK(spectrum_dimension_baseline(geometric, 0.13, tail).k == 3);
  CHECK(spectrum_dimension_baseline(geometric, 0.12, tail).k == 4);
  for (auto rule : {SpectrumRule::largest_removed, tail}) {
    const SpectrumEstimate sat = spectrum_dimension_baseline(geometric, 1e-9, rule);
    CHECK(sat.k == 20);
    CHECK(sat.saturated);
  }
  // On squares the tail after two modes is sqrt(1/48) = 0.144.
  CHECK(spectrum_dimension_baseline(geometric, 0.15, tail, true).k == 2);
  CHECK(spectrum_dimension_baseline(geometric, 0.13, tail, true).k == 3);

  // The first discarded value never exceeds the projection error, so this
  // rule never asks for more modes than either tail rule.
  for (double eps : {0.3, 0.05, 1e-3, 1e-5}) {
    const int k = spectrum_dimension_baseline(geometric, eps).k;
    CHECK(k <= spectrum_dimension_baseline(geometric, eps, tail).k);
    CHECK(k <= spectrum_dimension_baseline(geometric, eps, tail, true).k);
  }
  CHECK(parse_spectrum_rule(to_string(tail)) == tail);
  CHECK_THROWS_AS(parse_spectrum_rule("energy"), Error);
}
