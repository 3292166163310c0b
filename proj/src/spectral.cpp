#include "dhym/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dhym::spectral {

namespace {

void check_hermitian(const Eigen::MatrixXcd& m, const char* name) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol * scale) {
    throw NonHermitianInput(std::string(name) + " is not Hermitian: max |M - M^*| = " +
                            std::to_string(asym) + " exceeds tolerance");
  }
}

Eigen::MatrixXcd symmetrized(const Eigen::MatrixXcd& m) {
  return 0.5 * (m + m.adjoint().eval());
}

void check_dim(Eigen::Index n, const char* what) {
  if (n < 1 || n > kMaxDim) {
    throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(n) +
                            " outside supported range [1, " + std::to_string(kMaxDim) + "]");
  }
}

void check_spectrum(const Spectrum& s) {
  check_dim(static_cast<Eigen::Index>(s.lambda.size()), "Spectrum");
  for (double v : s.lambda) {
    if (!std::isfinite(v)) throw Error("Spectrum contains a non-finite eigenvalue");
  }
}

}  // namespace

HermitianPencil::HermitianPencil(Eigen::MatrixXcd omega_in, Eigen::MatrixXcd alpha_in)
    : omega(std::move(omega_in)), alpha(std::move(alpha_in)) {
  if (omega.rows() != omega.cols() || alpha.rows() != alpha.cols()) {
    throw DimensionMismatch("HermitianPencil: matrices must be square");
  }
  if (omega.rows() != alpha.rows()) {
    throw DimensionMismatch("HermitianPencil: omega and alpha sizes differ");
  }
  check_dim(omega.rows(), "HermitianPencil");
  check_hermitian(omega, "omega");
  check_hermitian(alpha, "alpha");
  omega = symmetrized(omega);
  alpha = symmetrized(alpha);
}

Spectrum make_spectrum(std::vector<double> lambda) {
  std::sort(lambda.begin(), lambda.end());
  Spectrum s{std::move(lambda)};
  check_spectrum(s);
  return s;
}

PencilReducer::PencilReducer(const Eigen::MatrixXcd& omega) {
  if (omega.rows() != omega.cols()) {
    throw DimensionMismatch("PencilReducer: omega must be square");
  }
  check_dim(omega.rows(), "PencilReducer");
  n_ = static_cast<int>(omega.rows());
  check_hermitian(omega, "omega");
  llt_.compute(symmetrized(omega));
  if (llt_.info() != Eigen::Success) {
    throw NotPositiveDefinite("omega is not positive definite: Cholesky factorization failed");
  }
}

Spectrum PencilReducer::eigenvalues(const Eigen::MatrixXcd& alpha) const {
  if (alpha.rows() != n_ || alpha.cols() != n_) {
    throw DimensionMismatch("PencilReducer: alpha size does not match omega");
  }
  check_hermitian(alpha, "alpha");
  // M = L^{-1} alpha L^{-*} is Hermitian with the pencil's eigenvalues.
  const auto L = llt_.matrixL();
  Eigen::MatrixXcd x = L.solve(symmetrized(alpha));
  Eigen::MatrixXcd m = L.solve(x.adjoint().eval()).adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(m),
                                                     Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error("eigenvalue iteration failed to converge");
  }
  Spectrum s;
  s.lambda.assign(es.eigenvalues().data(), es.eigenvalues().data() + n_);
  return s;  // Eigen returns ascending order
}

Spectrum relative_eigenvalues(const HermitianPencil& p) {
  return PencilReducer(p.omega).eigenvalues(p.alpha);
}

AngleRadius angle_and_radius(const Spectrum& s) {
  check_spectrum(s);
  double theta = 0.0;
  double radius = 1.0;
  for (double l : s.lambda) {
    theta += std::atan(l);
    radius *= std::hypot(1.0, l);
  }
  return {theta, radius};
}

std::complex<double> complex_volume_ratio(const Spectrum& s) {
  check_spectrum(s);
  std::complex<double> prod(1.0, 0.0);
  for (double l : s.lambda) prod *= std::complex<double>(1.0, l);
  return prod;
}

std::vector<double> elementary_symmetric(const Spectrum& s) {
  check_spectrum(s);
  std::vector<double> e(s.lambda.size() + 1, 0.0);
  e[0] = 1.0;
  std::size_t count = 0;
  for (double l : s.lambda) {
    ++count;
    for (std::size_t j = count; j >= 1; --j) e[j] += l * e[j - 1];
  }
  return e;
}

double dim3_phase_identity_residual(const Spectrum& s, double theta) {
  if (s.dim() != 3) {
    throw DimensionMismatch("dim3_phase_identity_residual requires a 3-dimensional spectrum");
  }
  if (std::abs(std::cos(theta)) <= kVerticalCosTol) {
    throw NearVerticalPhase("|cos(theta)| <= 1e-10: tangent identity ill-posed");
  }
  const std::vector<double> sigma = elementary_symmetric(s);
  return std::tan(theta) * (1.0 - sigma[2]) - (sigma[1] - sigma[3]);
}

std::vector<double> subsolution_margins(const Spectrum& s, double theta_hat) {
  check_spectrum(s);
  double total = 0.0;
  for (double l : s.lambda) total += std::atan(l);
  std::vector<double> margins(s.lambda.size());
  for (std::size_t j = 0; j < s.lambda.size(); ++j) {
    margins[j] = (total - std::atan(s.lambda[j])) - (theta_hat - std::numbers::pi / 2.0);
  }
  return margins;
}

std::vector<SubsetMargin> subsolution_margins_subsets(const Spectrum& s, double theta_hat,
                                                      int p) {
  check_spectrum(s);
  const int n = s.dim();
  if (p < 0 || p > n) {
    throw DimensionMismatch("subset size must lie in [0, n]");
  }
  std::vector<double> atans(s.lambda.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.lambda.size(); ++i) {
    atans[i] = std::atan(s.lambda[i]);
    total += atans[i];
  }
  std::vector<SubsetMargin> out;
  std::vector<int> idx(p);
  // Iterate over ascending index combinations of size p.
  for (int i = 0; i < p; ++i) idx[i] = i;
  while (true) {
    double omitted = 0.0;
    for (int i : idx) omitted += atans[i];
    out.push_back({idx, total - omitted - (theta_hat - p * std::numbers::pi / 2.0)});
    if (p == 0) break;
    int k = p - 1;
    while (k >= 0 && idx[k] == n - p + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

double j_operator(const Spectrum& s) {
  check_spectrum(s);
  double c = 0.0;
  for (double l : s.lambda) {
    if (l <= 0.0) {
      throw NonKahlerSpectrum("J-operator requires all eigenvalues > 0");
    }
    c += 1.0 / l;
  }
  return c;
}

}  // namespace dhym::spectral
