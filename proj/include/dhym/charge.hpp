#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dhym/errors.hpp"

// Cohomological obstruction engine: the charge path P(t) = sum_k C(n,k) i^k
// t^{n-k} A_k built from intersection numbers, its continuously tracked
// argument (the lifted angle), and the algebraic existence tests (Chern
// number inequality, subvariety phase obstruction, slope inequality, norm
// bound on the charge).
namespace dhym::charge {

struct SubvarietyData {
  std::string label;
  int dim = 0;            // p, with 1 <= p < n
  std::vector<double> B;  // B_0..B_p pairings on the subvariety
};

struct TopologicalData {
  int n = 0;              // ambient complex dimension
  std::vector<double> A;  // A_0..A_n pairings; A_0 > 0
  std::vector<SubvarietyData> subvarieties;

  // Throws DimensionMismatch / NonPositiveVolume when the invariants fail.
  void validate() const;
};

struct PathSample {
  double t;
  std::complex<double> p;  // P(t)
  double tracked_arg;      // continuously tracked argument at t
};

struct ChargePath {
  int n = 0;
  std::vector<std::complex<double>> coeffs;  // coeffs[k] multiplies t^{n-k}
  std::vector<PathSample> samples;           // recorded from t_max down to 1
  double lifted_angle = 0.0;                 // tracked argument at t = 1
  std::complex<double> z1;                   // gamma(1) = -P(1)/(n! i^n)
};

// Horner evaluation of P(t) from descending-power coefficients.
std::complex<double> eval_path(const std::vector<std::complex<double>>& coeffs, double t);

// Default upper end of the tracked interval: 10 * (1 + sum_k |A_k| / A_0),
// large enough that the leading term dominates by an order of magnitude.
double default_t_max(const TopologicalData& d);

// Tracks arg P(t) continuously from a dominance anchor down to t = 1 with
// per-step argument change < pi/4 (adaptive halving). The base branch is the
// principal argument at the anchor, where |arg P| < pi/2 by dominance of the
// leading term. Throws OriginCrossing when |P(t)| < tol * t_max^n * A_0, and
// StepUnderflow when halving stalls below 1e-12 away from the origin.
// t_max <= 0 selects default_t_max(d).
ChargePath build_charge_path(const TopologicalData& d, double t_max = 0.0, double tol = 1e-10);

struct Dim1Angle {
  double theta_dhym;        // principal Arg(A_0 + i A_1)
  double theta_bridgeland;  // theta_dhym + pi/2
};

// Closed-form n = 1 angle; the tracked lifted angle must agree with
// theta_dhym.
Dim1Angle dim1_angle(const TopologicalData& d);

struct NonvanishingVerdict {
  bool vanishes = false;
  double t = 0.0;  // crossing location when vanishes
};

/// n = 2: decides whether P(t) = A_0 t^2 + 2 i A_1 t - A_2 has a zero on
// [1, infinity) by inspecting the zeros of Im P and the sign of Re P there.
NonvanishingVerdict dim2_nonvanishing_check(const TopologicalData& d);

struct ChernVerdict {
  double lhs = 0.0;  // A_0 * (A_3 / 6)
  double rhs = 0.0;  // 3 * (A_2 / 2) * A_1
  bool holds = false;
  double identity_lhs = 0.0;  // A_0 * A_3
  double identity_rhs = 0.0;  // 9 * A_1 * A_2
  std::optional<double> crossing_t_squared;  // A_3 / (3 A_1) when > 1 and A_1 != 0
};

// n = 3 Chern number inequality (strict) with the degenerate-crossing
// identity and crossing time reported alongside.
ChernVerdict chern_inequality_dim3(const TopologicalData& d);

// gamma(t) = -sum_k (-i t)^{n-k} A_k / ((n-k)! k!), the Bridgeland-convention
// charge of the scaled background; gamma(1) is the ambient charge Z_X.
std::complex<double> gamma_value(const TopologicalData& d, double t);

// Z_V = -sum_k (-i)^{p-k} B_k / ((p-k)! k!).
std::complex<double> subvariety_charge(const SubvarietyData& v);

struct SubvarietyVerdict {
  std::string label;
  int dim = 0;
  std::complex<double> z_v;
  std::complex<double> z_x;
  double im_cross = 0.0;        // Im(Z_V * conj(Z_X))
  bool not_obstructed = false;  // strict positivity of im_cross
};

// Phase obstruction test Im(Z_V * conj(Z_X)) > 0 (division-free form of
// Im(Z_V / Z_X) > 0). Throws ZeroAmbientCharge when Z_X vanishes.
SubvarietyVerdict subvariety_obstruction(const TopologicalData& d, const SubvarietyData& v);

struct SlopeVerdict {
  std::string label;
  double subvariety_slope = 0.0;  // p * B_{p-1} / B_p
  double ambient_slope = 0.0;     // n * A_{n-1} / A_n
  bool holds = false;             // strict inequality
};

// Slope inequality for the J-equation; requires B_p > 0 and A_n > 0.
SlopeVerdict ls_slope_check(const TopologicalData& d, const SubvarietyData& v);

struct BpsNorm {
  double z_abs = 0.0;    // |gamma(1)|
  double ch_norm = 0.0;  // Euclidean norm of the pairing vector (A_k / k!)
  double ratio = 0.0;
  bool positive = false;
};

// Norm bound on the ambient charge. The ch vector uses the available
// pairings (A_k / k!) as stand-ins for Chern character components; any fixed
// norm supports the positivity verdict.
BpsNorm bps_norm_bound(const TopologicalData& d);

}  // namespace dhym::charge
