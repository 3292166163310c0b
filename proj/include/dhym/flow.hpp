#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "dhym/errors.hpp"

// Heat flow for the angle operator on a flat complex torus [0,1)^{2n} with
// constant background forms: du/dt = Theta(alpha_u) - theta, where
// alpha_u = alpha0 + i d dbar u is evaluated spectrally. The constant
// representative (u = 0 after mean normalization) is the unique solution, so
// convergence, uniqueness up to constants, the oscillation bound and the
// volume lower bound are all exactly testable.
namespace dhym::flow {

using Field = std::vector<double>;

struct TorusBackground {
  int n = 0;  // complex dimension, 1 or 2
  int N = 0;  // grid points per real dimension (even, >= 8)
  Eigen::MatrixXcd omega0;
  Eigen::MatrixXcd alpha0;

  TorusBackground(int n_in, int N_in, Eigen::MatrixXcd omega0_in, Eigen::MatrixXcd alpha0_in);

  std::size_t total() const;  // N^{2n}
  double h() const { return 1.0 / N; }
};

// Hermitian matrix field over the grid, flattened as total * n * n complex
// entries per point in row-major (j, k) order.
struct HessianField {
  int n = 0;
  std::size_t total = 0;
  std::vector<std::complex<double>> h;
  // Set when the energy of u outside the dealiasing band is >= 1e-3 of its
  // total non-constant energy.
  bool alias_warning = false;

  std::complex<double> at(std::size_t pt, int j, int k) const {
    return h[(pt * n + j) * n + k];
  }
};

// d^2 u / dz_j dz_bar_k by spectral differentiation with 2/3-rule
// dealiasing; Hermitian at every grid point by symbol symmetry.
HessianField complex_hessian(const Field& u, const TorusBackground& bg);

// Pointwise lifted angle of the pencil (omega0, alpha0 + d dbar u).
Field theta_field(const Field& u, const TorusBackground& bg);

enum class Stepper { Euler, RK4 };

struct FlowConfig {
  double dt = 0.0;    // <= 0 selects cfl * h^2 * lambda_min(omega0)
  double cfl = 0.25;  // parabolic stability constant for the auto step
  long max_steps = 400000;
  double tol = 1e-8;            // convergence tolerance on max |Theta - theta|
  std::optional<double> theta;  // empty = "auto": the constant representative's angle
  Stepper stepper = Stepper::Euler;
};

enum class FlowStatus { Converged, NotConverged, Diverged };

struct StepRecord {
  long step = 0;
  double sup_theta = 0.0;
  double inf_theta = 0.0;
  double residual = 0.0;  // max |Theta - theta| = max |du/dt|
  double volume = 0.0;    // V at this state
};

struct FlowTrace {
  FlowStatus status = FlowStatus::NotConverged;
  std::vector<StepRecord> records;  // one per evaluated state, step 0 first
  Field final_u;
  double theta_target = 0.0;
  double dt = 0.0;
  double r_hat = 0.0;
  long steps_taken = 0;
  // dt respects the quarter-h^2 parabolic bound (violations are allowed so
  // stability probes can run; flagged here and in summaries).
  bool cfl_ok = true;
  bool alias_warning = false;  // initial data had spectral tail above threshold
};

// Explicit stepping of the mean-normalized potential until
// max |Theta - theta| <= tol, max_steps is hit, or the sup norm passes 1e6
// (Diverged). The trace is returned in every case.
FlowTrace run_flow(const TorusBackground& bg, const Field& u0, const FlowConfig& cfg);

// V = grid mean of |det(omega0 + i(alpha0 + d dbar u))| (trapezoidal rule is
// the exact mean on a periodic grid).
double volume_functional(const Field& u, const TorusBackground& bg);

// r_hat = |det(omega0 + i alpha0)| from the constant data; the volume
// functional is bounded below by it, with equality at the solution.
double r_hat_value(const TorusBackground& bg);

// Lifted angle of the constant representative; the "auto" flow target.
double theta_auto(const TorusBackground& bg);

// Runs both initial data to convergence and returns
// max |(u_a - u_b) - mean(u_a - u_b)|. Throws NotConverged (or Diverged)
// when either run fails.
double uniqueness_check(const TorusBackground& bg, const Field& u0_a, const Field& u0_b,
                        const FlowConfig& cfg);

// Minimum over the grid of the smallest eigenvalue of the linearized
// coefficient matrix L^{-*} (I + M^2)^{-1} L^{-1} (omega0 = L L^*,
// M the reduced form of alpha_u); positive means the linearized flow is
// elliptic at this state.
double min_ellipticity_witness(const Field& u, const TorusBackground& bg);

// Directional derivative of the volume functional at u in the direction
// delta: -mean(|det K| Im tr(K^{-1} d dbar delta)) with
// K = omega0 + i alpha_u.
double first_variation(const Field& u, const Field& delta, const TorusBackground& bg);

// Zero field sized for the background.
Field make_field(const TorusBackground& bg);

// Grid coordinate helpers: point index -> (x_1..x_n, y_1..y_n) in [0,1)^{2n}.
std::vector<double> grid_point(const TorusBackground& bg, std::size_t index);

}  // namespace dhym::flow
