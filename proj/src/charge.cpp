#include "dhym/charge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dhym::charge {

namespace {

constexpr int kMaxAmbientDim = 8;
constexpr double kStepFloor = 1e-12;
constexpr double kMaxArgStep = std::numbers::pi / 4.0;
constexpr double kGrowArgStep = std::numbers::pi / 16.0;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// i^k and (-i)^k for integer k >= 0.
std::complex<double> i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

std::complex<double> minus_i_pow(int k) { return i_pow(3 * k); }

double real_pow_int(double t, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= t;
  return r;
}

void validate_subvariety(const SubvarietyData& v, int n) {
  if (v.dim < 1 || v.dim >= n) {
    throw DimensionMismatch("SubvarietyData '" + v.label + "': dim must satisfy 1 <= dim < " +
                            std::to_string(n));
  }
  if (static_cast<int>(v.B.size()) != v.dim + 1) {
    throw DimensionMismatch("SubvarietyData '" + v.label + "': B must have dim + 1 entries");
  }
  for (double b : v.B) {
    if (!std::isfinite(b)) {
      throw Error("SubvarietyData '" + v.label + "': non-finite pairing");
    }
  }
  if (v.B[0] <= 0.0) {
    throw NonPositiveVolume("SubvarietyData '" + v.label + "': B[0] (the volume pairing) must be positive");
  }
}

}  // namespace

void TopologicalData::validate() const {
  if (n < 1 || n > kMaxAmbientDim) {
    throw DimensionMismatch("TopologicalData: dimension " + std::to_string(n) +
                            " outside supported range [1, " + std::to_string(kMaxAmbientDim) + "]");
  }
  if (static_cast<int>(A.size()) != n + 1) {
    throw DimensionMismatch("TopologicalData: A must have n + 1 entries");
  }
  for (double a : A) {
    if (!std::isfinite(a)) throw Error("TopologicalData: non-finite pairing");
  }
  if (A[0] <= 0.0) {
    throw NonPositiveVolume("TopologicalData: A[0] (the volume pairing) must be positive");
  }
  for (const auto& v : subvarieties) validate_subvariety(v, n);
}

std::complex<double> eval_path(const std::vector<std::complex<double>>& coeffs, double t) {
  std::complex<double> acc(0.0, 0.0);
  for (const auto& c : coeffs) acc = acc * t + c;
  return acc;
}

double default_t_max(const TopologicalData& d) {
  d.validate();
  double sum = 0.0;
  for (double a : d.A) sum += std::abs(a);
  return 10.0 * (1.0 + sum / d.A[0]);
}

ChargePath build_charge_path(const TopologicalData& d, double t_max, double tol) {
  d.validate();
  if (tol <= 0.0) throw Error("build_charge_path: tol must be positive");
  const double t_top = (t_max > 0.0) ? t_max : default_t_max(d);
  if (t_top < 1.0) throw Error("build_charge_path: t_max must be >= 1");

  ChargePath path;
  path.n = d.n;
  path.coeffs.resize(d.n + 1);
  // Leading-term dominance bound: for t >= t_anchor, |P(t) - A_0 t^n| <= A_0 t^n / 10,
  // so the principal argument at the anchor is the branch that vanishes at
  // t = infinity.
  double dominance = 0.0;
  for (int k = 0; k <= d.n; ++k) {
    path.coeffs[k] = binomial(d.n, k) * i_pow(k) * d.A[k];
    dominance += binomial(d.n, k) * std::abs(d.A[k]) / d.A[0];
  }
  const double t_anchor = std::max(t_top, 10.0 * (1.0 + dominance));
  const double zero_threshold = tol * std::pow(t_top, d.n) * d.A[0];

  double t = t_anchor;
  std::complex<double> p = eval_path(path.coeffs, t);
  if (std::abs(p) < zero_threshold) {
    throw OriginCrossing(t, "charge path within zero threshold at t = " + std::to_string(t));
  }
  double tracked = std::arg(p);

  auto record = [&](double at, const std::complex<double>& value, double arg_value) {
    if (at <= t_top * (1.0 + 1e-15)) path.samples.push_back({at, value, arg_value});
  };
  record(t, p, tracked);

  // Walk down to each target in turn, tracking the argument continuously.
  for (double target : {t_top, 1.0}) {
    if (t <= target) continue;
    double h = (t - target) / 64.0;
    while (t > target) {
      const double t_next = std::max(t - h, target);
      const std::complex<double> p_next = eval_path(path.coeffs, t_next);
      if (std::abs(p_next) < zero_threshold) {
        throw OriginCrossing(t_next,
                             "charge path within zero threshold at t = " + std::to_string(t_next));
      }
      const double dphi = std::arg(p_next * std::conj(p));
      if (std::abs(dphi) >= kMaxArgStep) {
        h *= 0.5;
        if (h < kStepFloor) {
          throw StepUnderflow("argument tracking step fell below 1e-12 at t = " +
                              std::to_string(t));
        }
        continue;
      }
      tracked += dphi;
      t = t_next;
      p = p_next;
      record(t, p, tracked);
      if (std::abs(dphi) < kGrowArgStep) h = std::min(h * 2.0, std::max(t - target, h));
    }
  }

  path.lifted_angle = tracked;
  const std::complex<double> p1 = eval_path(path.coeffs, 1.0);
  path.z1 = -p1 / (factorial(d.n) * i_pow(d.n));
  return path;
}

Dim1Angle dim1_angle(const TopologicalData& d) {
  d.validate();
  if (d.n != 1) throw DimensionMismatch("dim1_angle requires n = 1");
  const double theta = std::atan2(d.A[1], d.A[0]);
  return {theta, theta + std::numbers::pi / 2.0};
}

NonvanishingVerdict dim2_nonvanishing_check(const TopologicalData& d) {
  d.validate();
  if (d.n != 2) throw DimensionMismatch("dim2_nonvanishing_check requires n = 2");
  // P(t) = A_0 t^2 + 2 i A_1 t - A_2; Im P = 2 A_1 t never vanishes on
  // [1, infinity) unless A_1 = 0, in which case Re P = A_0 t^2 - A_2 decides.
  if (d.A[1] != 0.0) return {false, 0.0};
  const double ratio = d.A[2] / d.A[0];
  if (ratio >= 1.0) return {true, std::sqrt(ratio)};
  return {false, 0.0};
}

ChernVerdict chern_inequality_dim3(const TopologicalData& d) {
  d.validate();
  if (d.n != 3) throw DimensionMismatch("chern_inequality_dim3 requires n = 3");
  ChernVerdict v;
  v.lhs = d.A[0] * (d.A[3] / 6.0);
  v.rhs = 3.0 * (d.A[2] / 2.0) * d.A[1];
  v.holds = v.lhs < v.rhs;
  v.identity_lhs = d.A[0] * d.A[3];
  v.identity_rhs = 9.0 * d.A[1] * d.A[2];
  if (d.A[1] != 0.0) {
    const double t_sq = d.A[3] / (3.0 * d.A[1]);
    if (t_sq > 1.0) v.crossing_t_squared = t_sq;
  }
  return v;
}

std::complex<double> gamma_value(const TopologicalData& d, double t) {
  d.validate();
  std::complex<double> sum(0.0, 0.0);
  for (int k = 0; k <= d.n; ++k) {
    sum += minus_i_pow(d.n - k) * real_pow_int(t, d.n - k) * d.A[k] /
           (factorial(d.n - k) * factorial(k));
  }
  return -sum;
}

std::complex<double> subvariety_charge(const SubvarietyData& v) {
  const int p = v.dim;
  std::complex<double> sum(0.0, 0.0);
  for (int k = 0; k <= p; ++k) {
    sum += minus_i_pow(p - k) * v.B[k] / (factorial(p - k) * factorial(k));
  }
  return -sum;
}

SubvarietyVerdict subvariety_obstruction(const TopologicalData& d, const SubvarietyData& v) {
  d.validate();
  validate_subvariety(v, d.n);
  SubvarietyVerdict out;
  out.label = v.label;
  out.dim = v.dim;
  out.z_x = gamma_value(d, 1.0);
  double scale = 0.0;
  for (int k = 0; k <= d.n; ++k) {
    scale += std::abs(d.A[k]) / (factorial(d.n - k) * factorial(k));
  }
  if (std::abs(out.z_x) <= 1e-12 * std::max(scale, 1e-300)) {
    throw ZeroAmbientCharge("ambient charge Z_X vanishes; phase comparison undefined");
  }
  out.z_v = subvariety_charge(v);
  out.im_cross = std::imag(out.z_v * std::conj(out.z_x));
  out.not_obstructed = out.im_cross > 0.0;
  return out;
}

SlopeVerdict ls_slope_check(const TopologicalData& d, const SubvarietyData& v) {
  d.validate();
  validate_subvariety(v, d.n);
  const int p = v.dim;
  if (v.B[p] <= 0.0) {
    throw NonPositiveVolume("ls_slope_check: B[p] = " + std::to_string(v.B[p]) +
                            " must be positive");
  }
  if (d.A[d.n] <= 0.0) {
    throw NonPositiveVolume("ls_slope_check: A[n] = " + std::to_string(d.A[d.n]) +
                            " must be positive");
  }
  SlopeVerdict out;
  out.label = v.label;
  out.subvariety_slope = p * v.B[p - 1] / v.B[p];
  out.ambient_slope = d.n * d.A[d.n - 1] / d.A[d.n];
  out.holds = out.subvariety_slope < out.ambient_slope;
  return out;
}

BpsNorm bps_norm_bound(const TopologicalData& d) {
  d.validate();
  BpsNorm out;
  out.z_abs = std::abs(gamma_value(d, 1.0));
  double sq = 0.0;
  for (int k = 0; k <= d.n; ++k) {
    const double c = d.A[k] / factorial(k);
    sq += c * c;
  }
  out.ch_norm = std::sqrt(sq);
  out.ratio = out.z_abs / out.ch_norm;
  out.positive = out.ratio > 0.0;
  return out;
}

}  // namespace dhym::charge
