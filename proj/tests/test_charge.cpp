#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "dhym/charge.hpp"
#include "dhym/errors.hpp"
#include "dhym/spectral.hpp"
#include "doctest.h"

using namespace dhym;
using namespace dhym::charge;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coefficients of P(t) built directly from the data, independent of the
// library's path construction: binom(n, k) i^k A_k on t^{n-k}.
std::vector<cd> make_coeffs(const TopologicalData& d) {
  std::vector<cd> c(d.n + 1);
  cd ik = 1.0;
  for (int k = 0; k <= d.n; ++k) {
    c[k] = binom(d.n, k) * ik * d.A[k];
    ik *= cd(0.0, 1.0);
  }
  return c;
}

double dominance_scale(const TopologicalData& d) {
  double s = 1.0;
  for (int k = 1; k <= d.n; ++k) s += binom(d.n, k) * std::abs(d.A[k]) / d.A[0];
  return s;
}

// Independent argument tracker: march from far out (where the top coefficient
// dominates and the argument is principal) down to t = 1 in many uniform
// steps, unwrapping by the principal branch of each increment. Rejects itself
// if any single step rotates too far to unwrap safely.
double brute_lifted_angle(const TopologicalData& d) {
  const auto coeffs = make_coeffs(d);
  const double t_hi = 20.0 * dominance_scale(d);
  const int steps = 600000;
  cd prev = eval_path(coeffs, t_hi);
  double arg = std::arg(prev);
  double max_step = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double t = t_hi + (1.0 - t_hi) * i / steps;
    const cd cur = eval_path(coeffs, t);
    const double inc = std::arg(cur / prev);
    max_step = std::max(max_step, std::abs(inc));
    arg += inc;
    prev = cur;
  }
  REQUIRE(max_step < 2.0);  // the sampling resolved the rotation
  return arg;
}

// Dense relative minimum of |P| on [1, t_hi]; the oracle for origin
// crossings.
double dense_min_ratio(const TopologicalData& d, double* where = nullptr) {
  const auto coeffs = make_coeffs(d);
  const double t_hi = 10.0 * dominance_scale(d);
  const int steps = 200000;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double t = 1.0 + (t_hi - 1.0) * i / steps;
    double scale = 0.0;
    for (int k = 0; k <= d.n; ++k) {
      scale += binom(d.n, k) * std::abs(d.A[k]) * std::pow(t, d.n - k);
    }
    const double ratio = std::abs(eval_path(coeffs, t)) / scale;
    if (ratio < best) {
      best = ratio;
      if (where) *where = t;
    }
  }
  return best;
}

TopologicalData data(int n, std::vector<double> A) {
  TopologicalData d;
  d.n = n;
  d.A = std::move(A);
  return d;
}

}  // namespace

TEST_CASE("validation of topological data") {
  CHECK_THROWS_AS(data(3, {0.0, 1.0, 1.0, 1.0}).validate(), NonPositiveVolume);
  CHECK_THROWS_AS(data(3, {-1.0, 1.0, 1.0, 1.0}).validate(), NonPositiveVolume);
  CHECK_THROWS_AS(data(3, {1.0, 1.0, 1.0}).validate(), DimensionMismatch);
  CHECK_THROWS_AS(data(9, std::vector<double>(10, 1.0)).validate(), DimensionMismatch);
  CHECK_THROWS_AS(data(0, {1.0}).validate(), DimensionMismatch);

  TopologicalData d = data(3, {6.0, 6.0, 6.0, 6.0});
  d.subvarieties.push_back({"V", 3, {1.0, 1.0, 1.0, 1.0}});
  CHECK_THROWS_AS(d.validate(), DimensionMismatch);  // dim must satisfy 1 <= p < n
  d.subvarieties[0] = {"V", 2, {0.0, 1.0, 1.0}};
  CHECK_THROWS_AS(d.validate(), NonPositiveVolume);
  d.subvarieties[0] = {"V", 2, {3.0, 3.0, 3.0}};
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("balanced cubic path: coefficients, angle, endpoint charge") {
  const auto d = data(3, {6.0, 6.0, 6.0, 6.0});
  const auto path = build_charge_path(d);
  const std::vector<cd> want = {{6.0, 0.0}, {0.0, 18.0}, {-18.0, 0.0}, {0.0, -6.0}};
  REQUIRE(path.coeffs.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(path.coeffs[k] - want[k]) <= 1e-12);

  CHECK(std::abs(path.lifted_angle - 0.75 * kPi) <= 1e-9);
  const double pointwise =
      spectral::angle_and_radius(spectral::make_spectrum({1.0, 1.0, 1.0})).theta;
  CHECK(std::abs(path.lifted_angle - pointwise) <= 1e-9);
  CHECK(std::abs(path.z1 - cd(2.0, 2.0)) <= 1e-12);

  // P(t) = 6 (t + i)^3 on a few sample points.
  for (double t : {1.0, 2.5, 7.0}) {
    const cd direct = 6.0 * std::pow(cd(t, 1.0), 3);
    CHECK(std::abs(eval_path(path.coeffs, t) - direct) <= 1e-9 * std::abs(direct));
  }

  // The recorded top sample pins the principal branch.
  REQUIRE(!path.samples.empty());
  CHECK(std::abs(path.samples.front().tracked_arg - std::arg(path.samples.front().p)) < 1e-6);
  CHECK(path.samples.back().t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(path.samples.back().tracked_arg == doctest::Approx(path.lifted_angle).epsilon(1e-12));
}

TEST_CASE("endpoint charge is minus P(1) over n! i^n") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> vol(0.5, 3.0);
  std::uniform_int_distribution<int> dims(1, 6);
  int done = 0;
  while (done < 200) {
    const int n = dims(rng);
    std::vector<double> A(n + 1);
    A[0] = vol(rng);
    for (int k = 1; k <= n; ++k) A[k] = coef(rng);
    const auto d = data(n, A);
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    cd ipow = 1.0;
    for (int i = 0; i < n; ++i) ipow *= cd(0.0, 1.0);
    const cd z = gamma_value(d, 1.0);
    const cd p1 = eval_path(make_coeffs(d), 1.0);
    CHECK(std::abs(p1 - (-fact * ipow * z)) <= 1e-12 * (1.0 + std::abs(p1)));
    ++done;
  }
}

TEST_CASE("lifted angle matches an independent coarse tracker") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> vol(0.5, 3.0);
  std::uniform_int_distribution<int> dims(1, 5);
  int checked = 0, trials = 0;
  while (checked < 25 && trials < 400) {
    ++trials;
    const int n = dims(rng);
    std::vector<double> A(n + 1);
    A[0] = vol(rng);
    for (int k = 1; k <= n; ++k) A[k] = coef(rng);
    const auto d = data(n, A);
    if (dense_min_ratio(d) < 0.02) continue;  // stay away from near-crossings
    const auto path = build_charge_path(d);
    CHECK(std::abs(path.lifted_angle - brute_lifted_angle(d)) < 1e-6);
    CHECK(std::abs(path.samples.front().tracked_arg - std::arg(path.samples.front().p)) < 1e-6);
    ++checked;
  }
  CHECK(checked == 25);
}

TEST_CASE("origin crossing is detected where the dense scan finds it") {
  // Im P(t) = 18 - 6 t^2 + ... : for A = (6, 2, 6, 18) the path meets the
  // origin at t = sqrt(3) on the nose: P(sqrt 3) = 6 t^3 - 18 t + i(6 t^2 - 18) = 0.
  const auto d = data(3, {6.0, 2.0, 6.0, 18.0});
  double where = 0.0;
  CHECK(dense_min_ratio(d, &where) < 1e-4);
  CHECK(where == doctest::Approx(std::sqrt(3.0)).epsilon(1e-3));
  try {
    build_charge_path(d);
    FAIL("expected an origin crossing");
  } catch (const OriginCrossing& e) {
    CHECK(e.t == doctest::Approx(std::sqrt(3.0)).epsilon(0.05));
  }
}

TEST_CASE("constant imaginary part keeps the path away from the origin") {
  // Im P = 2 A_1 t^2 ... for A = (6, 0, -6, -18): Im P(t) = -6(t^2 - 3) + ...
  // evaluates to the constant 18 after expansion, so |P| >= 18 everywhere.
  const auto d = data(3, {6.0, 0.0, -6.0, -18.0});
  const auto path = build_charge_path(d);
  for (const auto& s : path.samples) CHECK(std::abs(s.p.imag() - 18.0) <= 1e-9 * s.p.real() + 1e-9);
  CHECK(std::isfinite(path.lifted_angle));
}

TEST_CASE("one dimensional angle") {
  const auto line = dim1_angle(data(1, {1.0, 0.0}));
  CHECK(line.theta_dhym == 0.0);
  CHECK(line.theta_bridgeland == doctest::Approx(0.5 * kPi).epsilon(1e-15));

  const auto tilted = dim1_angle(data(1, {1.0, 1.0}));
  CHECK(tilted.theta_dhym == doctest::Approx(0.25 * kPi).epsilon(1e-15));

  const auto path = build_charge_path(data(1, {1.0, 1.0}));
  CHECK(std::abs(path.lifted_angle - tilted.theta_dhym) < 1e-9);
}

TEST_CASE("two dimensional nonvanishing check") {
  CHECK_FALSE(dim2_nonvanishing_check(data(2, {1.0, 0.5, -2.0})).vanishes);
  const auto hit = dim2_nonvanishing_check(data(2, {1.0, 0.0, 2.0}));
  CHECK(hit.vanishes);
  CHECK(hit.t == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_FALSE(dim2_nonvanishing_check(data(2, {1.0, 0.0, 0.5})).vanishes);
  CHECK_THROWS_AS(dim2_nonvanishing_check(data(3, {1.0, 0.0, 0.0, 0.0})), DimensionMismatch);
}

TEST_CASE("chern number inequality and degenerate crossing identity") {
  const auto v = chern_inequality_dim3(data(3, {6.0, 6.0, 6.0, 6.0}));
  CHECK(v.lhs == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(v.rhs == doctest::Approx(54.0).epsilon(1e-15));
  CHECK(v.holds);
  CHECK_FALSE(v.crossing_t_squared.has_value());

  const auto crossing = chern_inequality_dim3(data(3, {6.0, 2.0, 6.0, 18.0}));
  CHECK(crossing.identity_lhs == doctest::Approx(108.0).epsilon(1e-15));
  CHECK(crossing.identity_rhs == doctest::Approx(108.0).epsilon(1e-15));
  REQUIRE(crossing.crossing_t_squared.has_value());
  CHECK(*crossing.crossing_t_squared == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_FALSE(crossing.holds);  // equality is not strict inequality

  CHECK_THROWS_AS(chern_inequality_dim3(data(2, {1.0, 0.0, 0.0})), DimensionMismatch);
}

TEST_CASE("pointwise-constant model satisfies the chern inequality") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> lam(0.05, 20.0);
  std::uniform_real_distribution<double> vol(0.5, 10.0);
  int accepted = 0;
  while (accepted < 500) {
    const double l1 = lam(rng), l2 = lam(rng), l3 = lam(rng);
    const double theta = std::atan(l1) + std::atan(l2) + std::atan(l3);
    if (!(theta > 0.5 * kPi && theta < 1.5 * kPi)) continue;
    ++accepted;
    const double v = vol(rng);
    const double s1 = l1 + l2 + l3;
    const double s2 = l1 * l2 + l1 * l3 + l2 * l3;
    const double s3 = l1 * l2 * l3;
    const auto verdict =
        chern_inequality_dim3(data(3, {v, v * s1 / 3.0, v * s2 / 3.0, v * s3}));
    CHECK(verdict.holds);
  }
}

TEST_CASE("subvariety obstruction verdicts") {
  auto d = data(3, {6.0, 6.0, 6.0, 6.0});
  const SubvarietyData v{"V", 2, {3.0, 3.0, 3.0}};
  const auto verdict = subvariety_obstruction(d, v);
  CHECK(std::abs(verdict.z_x - cd(2.0, 2.0)) < 1e-12);
  CHECK(std::abs(verdict.z_v - cd(0.0, 3.0)) < 1e-12);
  CHECK(verdict.im_cross == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(verdict.not_obstructed);

  // Z_X real positive and Z_V real: the cross term vanishes, so the strict
  // test fails.
  const auto degenerate = subvariety_obstruction(data(3, {6.0, 2.0, 2.0, 0.0}),
                                                 SubvarietyData{"W", 2, {1.0, 0.0, 0.0}});
  CHECK(std::abs(degenerate.z_x - cd(1.0, 0.0)) < 1e-12);
  CHECK(degenerate.im_cross == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_FALSE(degenerate.not_obstructed);

  CHECK_THROWS_AS(
      subvariety_obstruction(data(2, {2.0, 0.0, 2.0}), SubvarietyData{"U", 1, {1.0, 0.0}}),
      ZeroAmbientCharge);
}

TEST_CASE("slope comparison") {
  const auto strict = ls_slope_check(data(2, {1.0, 1.0, 1.0}), SubvarietyData{"C", 1, {1.0, 1.0}});
  CHECK(strict.subvariety_slope == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(strict.ambient_slope == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(strict.holds);

  const auto equal = ls_slope_check(data(2, {1.0, 1.0, 1.0}), SubvarietyData{"C", 1, {2.0, 1.0}});
  CHECK(equal.subvariety_slope == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_FALSE(equal.holds);

  CHECK_THROWS_AS(
      ls_slope_check(data(2, {1.0, 1.0, -1.0}), SubvarietyData{"C", 1, {1.0, 1.0}}),
      NonPositiveVolume);
}

TEST_CASE("charge norm bound") {
  const auto b = bps_norm_bound(data(3, {6.0, 6.0, 6.0, 6.0}));
  CHECK(b.z_abs == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(b.ch_norm == doctest::Approx(std::sqrt(36.0 + 36.0 + 9.0 + 1.0)).epsilon(1e-12));
  CHECK(b.ratio == doctest::Approx(b.z_abs / b.ch_norm).epsilon(1e-12));
  CHECK(b.positive);
}

TEST_CASE("gamma evaluation is finite at the origin") {
  const auto d = data(3, {6.0, 6.0, 6.0, 6.0});
  const cd g0 = gamma_value(d, 0.0);
  CHECK(std::isfinite(g0.real()));
  CHECK(std::isfinite(g0.imag()));
  CHECK(std::abs(g0 - cd(-1.0, 0.0)) < 1e-15);  // -A_3 / 3!
}

TEST_CASE("default horizon grows with the data") {
  const auto small = default_t_max(data(1, {1.0, 0.0}));
  CHECK(small >= 10.0);
  const auto big = default_t_max(data(3, {1.0, 50.0, 50.0, 50.0}));
  CHECK(big > small);
}
