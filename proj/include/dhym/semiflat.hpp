#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dhym/errors.hpp"
#include "dhym/spectral.hpp"

// Semi-flat mirror correspondence on a torus fibration: a convex potential phi
// on the base and a section potential f determine, at each base point, the
// special-Lagrangian graph matrix S = A + i A^{-1}(F - D) (A the Hessian of
// phi, F the Hessian of f, D the third-derivative contraction with the
// gradient) and, on the mirror side, a curvature pencil whose lifted angle
// must equal arg det S. Both sides use closed-form derivatives so the identity
// is verified to machine precision. Frame constants are pinned in
// docs/conventions.md by the one-dimensional oracle lambda = c / a^2.
namespace dhym::semiflat {

struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const;
  bool contains(const std::vector<double>& x) const;  // closed box, 1e-12 slack
};

// One-axis trigonometric perturbation eps * trig(w * x_axis + phase); keeping
// perturbations separable makes every third derivative a closed form.
struct Perturbation {
  int axis = 0;
  double eps = 0.0;
  double w = 1.0;
  double phase = 0.0;
  bool use_sin = true;
};

// phi(x) = 1/2 sum_i a_i x_i^2 + sum of per-axis perturbations, over a box
// domain. Convexity is not demanded at construction: evaluation sites check
// positive definiteness where the algebra needs it.
class ConvexPotential {
 public:
  ConvexPotential(std::vector<double> quadratic, std::vector<Perturbation> perturbations,
                  Box domain);

  int dim() const { return static_cast<int>(quad_.size()); }
  const Box& domain() const { return domain_; }
  bool is_quadratic() const { return perts_.empty(); }
  const std::vector<double>& quadratic() const { return quad_; }
  const std::vector<Perturbation>& perturbations() const { return perts_; }

  double value(const std::vector<double>& x) const;
  Eigen::VectorXd gradient(const std::vector<double>& x) const;
  Eigen::MatrixXd hessian(const std::vector<double>& x) const;
  // Fully symmetric third derivative; nonzero only on the perturbed axes.
  double third(int j, int k, int m, const std::vector<double>& x) const;

 private:
  std::vector<double> quad_;
  std::vector<Perturbation> perts_;
  Box domain_;
};

// Dual of a positive pure quadratic: coefficients 1/a_i over the image box.
// The Legendre map of the dual inverts the Legendre map of the original.
ConvexPotential legendre_dual(const ConvexPotential& phi);

// amp * trig(w . x + phase), gradient and Hessian closed form.
struct Wave {
  double amp = 0.0;
  std::vector<double> w;
  double phase = 0.0;
  bool use_sin = true;
};

// coef * prod_d x_d^{pows_d}.
struct Monomial {
  double coef = 0.0;
  std::vector<int> pows;
};

class SectionPotential {
 public:
  SectionPotential(int dim, std::vector<Wave> waves, std::vector<Monomial> monomials);

  int dim() const { return dim_; }
  const std::vector<Wave>& waves() const { return waves_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  double value(const std::vector<double>& x) const;
  Eigen::VectorXd gradient(const std::vector<double>& x) const;
  Eigen::MatrixXd hessian(const std::vector<double>& x) const;

 private:
  int dim_;
  std::vector<Wave> waves_;
  std::vector<Monomial> monomials_;
};

// x -> grad phi(x); throws OutOfDomain when x is outside the box.
std::vector<double> legendre_map(const ConvexPotential& phi, const std::vector<double>& x);

// S(x) = A + i A^{-1}(F - D) with A = Hess phi, F = Hess f,
// D_jk = sum_m phi_jkm (A^{-1} grad f)_m. Throws SingularHessian when A is
// not positive definite.
Eigen::MatrixXcd slag_matrix(const ConvexPotential& phi, const SectionPotential& f,
                             const std::vector<double>& x);

// Relative eigenvalues of the mirror curvature pencil (A^2, F - D); equals
// the spectrum of A^{-1} Im S. Throws LagrangianViolation when F - D fails to
// be symmetric (cannot happen for gradient sections; defensive).
spectral::Spectrum mirror_curvature_spectrum(const ConvexPotential& phi,
                                             const SectionPotential& f,
                                             const std::vector<double>& x);

// arg det S lifted factor by factor: each eigenvalue mu of A^{-1} Im S
// contributes arctan(mu), the same convention as the angle operator.
double slag_phase(const Eigen::MatrixXcd& s);

struct SemiFlatPointReport {
  std::vector<double> x;
  Eigen::MatrixXcd s;
  double slag_phase = 0.0;
  std::vector<double> mirror_spectrum;
  double mirror_theta = 0.0;
  double mismatch = 0.0;     // |e^{i mirror_theta} - det S / |det S||
  double ma_residual = 0.0;  // |det Hess(phi) - 1| at x
};

SemiFlatPointReport semiflat_point(const ConvexPotential& phi, const SectionPotential& f,
                                   const std::vector<double>& x);

// Uniform half-open lattice over the box: lo + (hi - lo) * k / count per axis.
struct GridSpec {
  std::vector<int> counts;
};

std::vector<std::vector<double>> grid_points(const Box& box, const GridSpec& grid);

struct PhaseCheckReport {
  double max_phase_gap = 0.0;     // max |arg det S - Theta(mirror)|
  double max_residual_gap = 0.0;  // max |Im(e^{-i theta_hat} det S)/det A - r sin(Theta - theta_hat)|
  double max_mismatch = 0.0;      // max |e^{i Theta} - det S / |det S||
  double ma_residual = 0.0;       // max |det Hess(phi) - 1|
  bool ma_warning = false;        // ma_residual > 1e-8
  std::size_t points = 0;
};

// Sweeps the grid and verifies that the graph phase and the mirror angle are
// the same function; theta_hat is a free parameter for the two equivalent
// vanishing conditions, not something being solved for.
PhaseCheckReport phase_equivalence_check(const ConvexPotential& phi, const SectionPotential& f,
                                         const GridSpec& grid, double theta_hat);

// Max |det Hess(phi) - 1| over the grid; a warning above 1e-8, never an
// error: the phase identity holds regardless.
double monge_ampere_residual(const ConvexPotential& phi, const GridSpec& grid);

}  // namespace dhym::semiflat
