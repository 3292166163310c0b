#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dhym/errors.hpp"

// Pointwise algebra of a Hermitian form alpha measured against a Hermitian
// positive-definite background omega: relative eigenvalues, the angle
// operator Theta = sum_i arctan(lambda_i), the radius prod_i sqrt(1+lambda_i^2),
// elementary symmetric functions, subsolution margins and the J-operator.
namespace dhym::spectral {

inline constexpr int kMaxDim = 8;
// Relative symmetry tolerance on matrix inputs; inputs within it are
// symmetrized before use to absorb round-off.
inline constexpr double kHermitianTol = 1e-12;
// |cos(theta)| at or below which tangent-based identities are rejected.
inline constexpr double kVerticalCosTol = 1e-10;

// A pointwise pencil (omega, alpha): omega Hermitian positive definite,
// alpha Hermitian, both n x n with 1 <= n <= kMaxDim. The constructor
// validates sizes and Hermiticity and symmetrizes both matrices;
// positive-definiteness of omega is established by the Cholesky reduction
// when eigenvalues are requested.
struct HermitianPencil {
  Eigen::MatrixXcd omega;
  Eigen::MatrixXcd alpha;

  HermitianPencil(Eigen::MatrixXcd omega_in, Eigen::MatrixXcd alpha_in);

  int dim() const { return static_cast<int>(omega.rows()); }
};

// Real eigenvalues of the relative endomorphism omega^{-1} alpha, sorted
// ascending.
struct Spectrum {
  std::vector<double> lambda;

  int dim() const { return static_cast<int>(lambda.size()); }
};

// Builds a Spectrum from raw values: sorts ascending and validates size and
// finiteness.
Spectrum make_spectrum(std::vector<double> lambda);

struct AngleRadius {
  double theta;   // lifted angle, in (-n*pi/2, n*pi/2)
  double radius;  // prod sqrt(1 + lambda_i^2), >= 1
};

// Reusable Cholesky reduction of a fixed background: omega = L L^*, and the
// relative eigenvalues of alpha are the (real) eigenvalues of
// L^{-1} alpha L^{-*}. Congruence-stable by construction.
class PencilReducer {
 public:
  explicit PencilReducer(const Eigen::MatrixXcd& omega);

  int dim() const { return n_; }
  Spectrum eigenvalues(const Eigen::MatrixXcd& alpha) const;

 private:
  Eigen::LLT<Eigen::MatrixXcd> llt_;
  int n_;
};

// Relative eigenvalues of the pencil, sorted ascending.
Spectrum relative_eigenvalues(const HermitianPencil& p);

// theta = sum arctan(lambda_i); radius = prod sqrt(1 + lambda_i^2). The
// complex identity prod(1 + i*lambda_i) = radius * e^{i*theta} holds as
// complex numbers (not just mod 2*pi) because each factor's argument lies in
// (-pi/2, pi/2).
AngleRadius angle_and_radius(const Spectrum& s);

// prod(1 + i*lambda_i).
std::complex<double> complex_volume_ratio(const Spectrum& s);

// Elementary symmetric functions sigma_0..sigma_n via the stable
// polynomial-expansion recurrence.
std::vector<double> elementary_symmetric(const Spectrum& s);

// tan(theta)*(1 - sigma_2) - (sigma_1 - sigma_3) for n = 3; zero when theta
// is the angle of s (tangent-addition identity in cleared form).
double dim3_phase_identity_residual(const Spectrum& s, double theta);

// For each j, sum_{i != j} arctan(lambda_i) - (theta_hat - pi/2). All
// margins >= 0 is the subsolution condition.
std::vector<double> subsolution_margins(const Spectrum& s, double theta_hat);

struct SubsetMargin {
  std::vector<int> indices;  // the omitted index set J, ascending
  double margin;             // sum_{i not in J} arctan(lambda_i) - (theta_hat - p*pi/2)
};

// Generalized margins over all index sets J with |J| = p.
std::vector<SubsetMargin> subsolution_margins_subsets(const Spectrum& s, double theta_hat,
                                                      int p);

// sum 1/lambda_i; requires all lambda_i > 0.
double j_operator(const Spectrum& s);

}  // namespace dhym::spectral
