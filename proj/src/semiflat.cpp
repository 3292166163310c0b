#include "dhym/semiflat.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace dhym::semiflat {

namespace {

constexpr double kBoxSlack = 1e-12;
constexpr double kLagrangianTol = 1e-10;

// Chain of derivatives of sin/cos: order 0..3.
double trig_deriv(bool use_sin, int order, double arg) {
  switch (((use_sin ? 0 : 1) + order) % 4) {
    case 0: return std::sin(arg);
    case 1: return std::cos(arg);
    case 2: return -std::sin(arg);
    default: return -std::cos(arg);
  }
}

double int_pow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// Derivative factor d^k/dx^k x^p for k = 0, 1, 2 (zero when p < k).
double monomial_factor(double x, int p, int k) {
  if (p < k) return 0.0;
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= static_cast<double>(p - i);
  return c * int_pow(x, p - k);
}

void check_point(int dim, const std::vector<double>& x, const char* what) {
  if (static_cast<int>(x.size()) != dim) {
    throw DimensionMismatch(std::string(what) + ": point dimension does not match");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite coordinate");
  }
}

// Cholesky of the Hessian of phi; positive definiteness is what every use of
// A^{-1} below needs.
Eigen::LLT<Eigen::MatrixXd> hessian_factor(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularHessian("Hessian of the convex potential is not positive definite");
  }
  return llt;
}

// F - D: the Hessian of f minus the third-derivative contraction with
// g = A^{-1} grad f. This is the matrix whose symmetry is the Lagrangian
// condition for gradient sections.
Eigen::MatrixXd curvature_core(const ConvexPotential& phi, const SectionPotential& f,
                               const std::vector<double>& x,
                               const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const int n = phi.dim();
  const Eigen::VectorXd g = llt.solve(f.gradient(x));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int m = 0; m < n; ++m) s += phi.third(j, k, m, x) * g[m];
      d(j, k) = s;
    }
  }
  return f.hessian(x) - d;
}

void check_lagrangian(const Eigen::MatrixXd& core) {
  const double scale = 1.0 + core.cwiseAbs().maxCoeff();
  const double asym = (core - core.transpose()).cwiseAbs().maxCoeff();
  if (asym > kLagrangianTol * scale) {
    throw LagrangianViolation("curvature matrix is not symmetric: section is not a gradient");
  }
}

}  // namespace

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) {
    throw DimensionMismatch("Box: lo and hi must have the same nonzero dimension");
  }
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || !(lo[d] < hi[d])) {
      throw Error("Box: each lo must be finite and strictly below hi");
    }
  }
}

bool Box::contains(const std::vector<double>& x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (!(x[d] >= lo[d] - kBoxSlack && x[d] <= hi[d] + kBoxSlack)) return false;
  }
  return true;
}

ConvexPotential::ConvexPotential(std::vector<double> quadratic,
                                 std::vector<Perturbation> perturbations, Box domain)
    : quad_(std::move(quadratic)), perts_(std::move(perturbations)), domain_(std::move(domain)) {
  if (quad_.empty()) throw DimensionMismatch("ConvexPotential: empty quadratic part");
  for (double a : quad_) {
    if (!std::isfinite(a)) throw Error("ConvexPotential: non-finite quadratic coefficient");
  }
  domain_.validate();
  if (domain_.dim() != dim()) {
    throw DimensionMismatch("ConvexPotential: domain dimension does not match");
  }
  for (const auto& p : perts_) {
    if (p.axis < 0 || p.axis >= dim()) {
      throw DimensionMismatch("ConvexPotential: perturbation axis out of range");
    }
    if (!std::isfinite(p.eps) || !std::isfinite(p.w) || !std::isfinite(p.phase)) {
      throw Error("ConvexPotential: non-finite perturbation parameter");
    }
  }
}

double ConvexPotential::value(const std::vector<double>& x) const {
  check_point(dim(), x, "ConvexPotential");
  double v = 0.0;
  for (int i = 0; i < dim(); ++i) v += 0.5 * quad_[i] * x[i] * x[i];
  for (const auto& p : perts_) v += p.eps * trig_deriv(p.use_sin, 0, p.w * x[p.axis] + p.phase);
  return v;
}

Eigen::VectorXd ConvexPotential::gradient(const std::vector<double>& x) const {
  check_point(dim(), x, "ConvexPotential");
  Eigen::VectorXd g(dim());
  for (int i = 0; i < dim(); ++i) g[i] = quad_[i] * x[i];
  for (const auto& p : perts_) {
    g[p.axis] += p.eps * p.w * trig_deriv(p.use_sin, 1, p.w * x[p.axis] + p.phase);
  }
  return g;
}

Eigen::MatrixXd ConvexPotential::hessian(const std::vector<double>& x) const {
  check_point(dim(), x, "ConvexPotential");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) h(i, i) = quad_[i];
  for (const auto& p : perts_) {
    h(p.axis, p.axis) += p.eps * p.w * p.w * trig_deriv(p.use_sin, 2, p.w * x[p.axis] + p.phase);
  }
  return h;
}

double ConvexPotential::third(int j, int k, int m, const std::vector<double>& x) const {
  check_point(dim(), x, "ConvexPotential");
  if (j < 0 || j >= dim() || k < 0 || k >= dim() || m < 0 || m >= dim()) {
    throw DimensionMismatch("ConvexPotential: third-derivative index out of range");
  }
  if (j != k || k != m) return 0.0;
  double t = 0.0;
  for (const auto& p : perts_) {
    if (p.axis == j) {
      t += p.eps * p.w * p.w * p.w * trig_deriv(p.use_sin, 3, p.w * x[p.axis] + p.phase);
    }
  }
  return t;
}

ConvexPotential legendre_dual(const ConvexPotential& phi) {
  if (!phi.is_quadratic()) {
    throw Error("legendre_dual: only pure quadratic potentials have a closed-form dual");
  }
  const auto& a = phi.quadratic();
  std::vector<double> dual(a.size());
  Box image;
  image.lo.resize(a.size());
  image.hi.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0)) {
      throw SingularHessian("legendre_dual: quadratic coefficients must be positive");
    }
    dual[i] = 1.0 / a[i];
    image.lo[i] = a[i] * phi.domain().lo[i];
    image.hi[i] = a[i] * phi.domain().hi[i];
  }
  return ConvexPotential(std::move(dual), {}, std::move(image));
}

SectionPotential::SectionPotential(int dim, std::vector<Wave> waves,
                                   std::vector<Monomial> monomials)
    : dim_(dim), waves_(std::move(waves)), monomials_(std::move(monomials)) {
  if (dim_ < 1) throw DimensionMismatch("SectionPotential: dimension must be >= 1");
  for (const auto& w : waves_) {
    if (static_cast<int>(w.w.size()) != dim_) {
      throw DimensionMismatch("SectionPotential: wave frequency vector has wrong dimension");
    }
    for (double v : w.w) {
      if (!std::isfinite(v)) throw Error("SectionPotential: non-finite wave frequency");
    }
    if (!std::isfinite(w.amp) || !std::isfinite(w.phase)) {
      throw Error("SectionPotential: non-finite wave parameter");
    }
  }
  for (const auto& m : monomials_) {
    if (static_cast<int>(m.pows.size()) != dim_) {
      throw DimensionMismatch("SectionPotential: monomial exponent vector has wrong dimension");
    }
    for (int p : m.pows) {
      if (p < 0) throw Error("SectionPotential: monomial exponents must be >= 0");
    }
    if (!std::isfinite(m.coef)) throw Error("SectionPotential: non-finite monomial coefficient");
  }
}

double SectionPotential::value(const std::vector<double>& x) const {
  check_point(dim_, x, "SectionPotential");
  double v = 0.0;
  for (const auto& w : waves_) {
    double arg = w.phase;
    for (int d = 0; d < dim_; ++d) arg += w.w[d] * x[d];
    v += w.amp * trig_deriv(w.use_sin, 0, arg);
  }
  for (const auto& m : monomials_) {
    double t = m.coef;
    for (int d = 0; d < dim_; ++d) t *= int_pow(x[d], m.pows[d]);
    v += t;
  }
  return v;
}

Eigen::VectorXd SectionPotential::gradient(const std::vector<double>& x) const {
  check_point(dim_, x, "SectionPotential");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (const auto& w : waves_) {
    double arg = w.phase;
    for (int d = 0; d < dim_; ++d) arg += w.w[d] * x[d];
    const double d1 = w.amp * trig_deriv(w.use_sin, 1, arg);
    for (int d = 0; d < dim_; ++d) g[d] += w.w[d] * d1;
  }
  for (const auto& m : monomials_) {
    for (int d = 0; d < dim_; ++d) {
      double t = m.coef * monomial_factor(x[d], m.pows[d], 1);
      for (int e = 0; e < dim_; ++e) {
        if (e != d) t *= int_pow(x[e], m.pows[e]);
      }
      g[d] += t;
    }
  }
  return g;
}

Eigen::MatrixXd SectionPotential::hessian(const std::vector<double>& x) const {
  check_point(dim_, x, "SectionPotential");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
  for (const auto& w : waves_) {
    double arg = w.phase;
    for (int d = 0; d < dim_; ++d) arg += w.w[d] * x[d];
    const double d2 = w.amp * trig_deriv(w.use_sin, 2, arg);
    for (int j = 0; j < dim_; ++j) {
      for (int k = 0; k < dim_; ++k) h(j, k) += w.w[j] * w.w[k] * d2;
    }
  }
  for (const auto& m : monomials_) {
    for (int j = 0; j < dim_; ++j) {
      for (int k = j; k < dim_; ++k) {
        double t = m.coef;
        if (j == k) {
          t *= monomial_factor(x[j], m.pows[j], 2);
          for (int e = 0; e < dim_; ++e) {
            if (e != j) t *= int_pow(x[e], m.pows[e]);
          }
        } else {
          t *= monomial_factor(x[j], m.pows[j], 1) * monomial_factor(x[k], m.pows[k], 1);
          for (int e = 0; e < dim_; ++e) {
            if (e != j && e != k) t *= int_pow(x[e], m.pows[e]);
          }
        }
        h(j, k) += t;
        if (j != k) h(k, j) += t;
      }
    }
  }
  return h;
}

std::vector<double> legendre_map(const ConvexPotential& phi, const std::vector<double>& x) {
  check_point(phi.dim(), x, "legendre_map");
  if (!phi.domain().contains(x)) {
    throw OutOfDomain("legendre_map: point lies outside the potential's domain");
  }
  const Eigen::VectorXd g = phi.gradient(x);
  return std::vector<double>(g.data(), g.data() + g.size());
}

Eigen::MatrixXcd slag_matrix(const ConvexPotential& phi, const SectionPotential& f,
                             const std::vector<double>& x) {
  if (phi.dim() != f.dim()) {
    throw DimensionMismatch("slag_matrix: potential dimensions do not match");
  }
  check_point(phi.dim(), x, "slag_matrix");
  const Eigen::MatrixXd a = phi.hessian(x);
  const auto llt = hessian_factor(a);
  const Eigen::MatrixXd m = llt.solve(curvature_core(phi, f, x, llt));
  return a.cast<std::complex<double>>() +
         std::complex<double>(0.0, 1.0) * m.cast<std::complex<double>>();
}

spectral::Spectrum mirror_curvature_spectrum(const ConvexPotential& phi,
                                             const SectionPotential& f,
                                             const std::vector<double>& x) {
  if (phi.dim() != f.dim()) {
    throw DimensionMismatch("mirror_curvature_spectrum: potential dimensions do not match");
  }
  check_point(phi.dim(), x, "mirror_curvature_spectrum");
  const Eigen::MatrixXd a = phi.hessian(x);
  const auto llt = hessian_factor(a);
  const Eigen::MatrixXd core = curvature_core(phi, f, x, llt);
  check_lagrangian(core);
  const Eigen::MatrixXd symmetric = 0.5 * (core + core.transpose());
  spectral::HermitianPencil pencil((a * a).cast<std::complex<double>>(),
                                   symmetric.cast<std::complex<double>>());
  return spectral::relative_eigenvalues(pencil);
}

double slag_phase(const Eigen::MatrixXcd& s) {
  const int n = static_cast<int>(s.rows());
  const Eigen::MatrixXd re = s.real();
  const Eigen::MatrixXd im = s.imag();
  Eigen::LLT<Eigen::MatrixXd> llt(re);
  if (llt.info() != Eigen::Success) {
    throw SingularHessian("slag_phase: real part of the graph matrix is not positive definite");
  }
  // Factor-by-factor lifting: det S = det(Re S) prod (1 + i mu_i) with mu the
  // eigenvalues of (Re S)^{-1} Im S; each factor contributes arctan(mu_i).
  const Eigen::MatrixXd ratio = llt.solve(im);
  Eigen::EigenSolver<Eigen::MatrixXd> es(ratio);
  if (es.info() != Eigen::Success) {
    throw Error("slag_phase: eigenvalue iteration failed");
  }
  double theta = 0.0;
  for (int i = 0; i < n; ++i) theta += std::atan(es.eigenvalues()[i].real());
  return theta;
}

SemiFlatPointReport semiflat_point(const ConvexPotential& phi, const SectionPotential& f,
                                   const std::vector<double>& x) {
  SemiFlatPointReport rep;
  rep.x = x;
  rep.s = slag_matrix(phi, f, x);
  rep.slag_phase = slag_phase(rep.s);
  const spectral::Spectrum spectrum = mirror_curvature_spectrum(phi, f, x);
  rep.mirror_spectrum = spectrum.lambda;
  rep.mirror_theta = spectral::angle_and_radius(spectrum).theta;
  const std::complex<double> det = rep.s.determinant();
  const double abs_det = std::abs(det);
  if (abs_det == 0.0) {
    throw SingularHessian("semiflat_point: graph matrix is singular");
  }
  rep.mismatch = std::abs(std::exp(std::complex<double>(0.0, rep.mirror_theta)) - det / abs_det);
  rep.ma_residual = std::abs(phi.hessian(x).determinant() - 1.0);
  return rep;
}

std::vector<std::vector<double>> grid_points(const Box& box, const GridSpec& grid) {
  box.validate();
  if (grid.counts.size() != box.lo.size()) {
    throw DimensionMismatch("grid_points: counts dimension does not match the box");
  }
  std::size_t total = 1;
  for (int c : grid.counts) {
    if (c < 1) throw Error("grid_points: per-axis counts must be >= 1");
    total *= static_cast<std::size_t>(c);
  }
  const int n = box.dim();
  std::vector<std::vector<double>> pts(total, std::vector<double>(n));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int d = n - 1; d >= 0; --d) {
      const int k = static_cast<int>(rem % grid.counts[d]);
      rem /= grid.counts[d];
      pts[idx][d] = box.lo[d] + (box.hi[d] - box.lo[d]) * k / grid.counts[d];
    }
  }
  return pts;
}

PhaseCheckReport phase_equivalence_check(const ConvexPotential& phi, const SectionPotential& f,
                                         const GridSpec& grid, double theta_hat) {
  PhaseCheckReport out;
  const auto pts = grid_points(phi.domain(), grid);
  out.points = pts.size();
  for (const auto& x : pts) {
    const SemiFlatPointReport rep = semiflat_point(phi, f, x);
    out.max_phase_gap = std::max(out.max_phase_gap, std::abs(rep.slag_phase - rep.mirror_theta));
    out.max_mismatch = std::max(out.max_mismatch, rep.mismatch);
    out.ma_residual = std::max(out.ma_residual, rep.ma_residual);

    const spectral::AngleRadius ar =
        spectral::angle_and_radius(spectral::make_spectrum(rep.mirror_spectrum));
    const std::complex<double> det = rep.s.determinant();
    const double det_a = rep.s.real().determinant();
    const double lhs =
        (std::exp(std::complex<double>(0.0, -theta_hat)) * det).imag() / det_a;
    const double rhs = ar.radius * std::sin(ar.theta - theta_hat);
    out.max_residual_gap = std::max(out.max_residual_gap, std::abs(lhs - rhs));
  }
  out.ma_warning = out.ma_residual > 1e-8;
  return out;
}

double monge_ampere_residual(const ConvexPotential& phi, const GridSpec& grid) {
  double worst = 0.0;
  for (const auto& x : grid_points(phi.domain(), grid)) {
    worst = std::max(worst, std::abs(phi.hessian(x).determinant() - 1.0));
  }
  return worst;
}

}  // namespace dhym::semiflat
