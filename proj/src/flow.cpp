#include "dhym/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dhym/grid.hpp"
#include "dhym/parallel.hpp"
#include "dhym/spectral.hpp"

namespace dhym::flow {

namespace {

using CVec = std::vector<std::complex<double>>;
constexpr double kDivergenceGuard = 1e6;
constexpr double kAliasEnergyFraction = 1e-3;
constexpr std::size_t kSweepBlock = 8192;

struct SweepStats {
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  double max_residual = 0.0;
  double volume_sum = 0.0;
};

// Precomputed spectral symbols and pointwise pencil data for one background.
class Workspace {
 public:
  explicit Workspace(const TorusBackground& bg)
      : bg_(bg), grid_(bg.n, bg.N), total_(bg.total()), n_(bg.n), N_(bg.N) {
    build_symbols();
    build_engine();
  }

  std::size_t total() const { return total_; }

  // Math-normalized spectrum of a real field (coefficients of e^{+2 pi i m.x}).
  CVec spectrum(const Field& u) {
    CVec in(total_), out(total_);
    for (std::size_t i = 0; i < total_; ++i) in[i] = u[i];
    grid_.forward(in.data(), out.data());
    const double inv = 1.0 / static_cast<double>(total_);
    for (auto& v : out) v *= inv;
    return out;
  }

  Field materialize(const CVec& uhat) {
    CVec out(total_);
    grid_.backward(uhat.data(), out.data());
    Field u(total_);
    for (std::size_t i = 0; i < total_; ++i) u[i] = out[i].real();
    return u;
  }

  // Energy outside the dealiasing band relative to total non-constant energy.
  bool alias_tail_large(const CVec& uhat) const {
    double tail = 0.0, all = 0.0;
    for (std::size_t i = 1; i < total_; ++i) {
      const double e = std::norm(uhat[i]);
      all += e;
      if (!mask_[i]) tail += e;
    }
    return all > 0.0 && tail >= kAliasEnergyFraction * all;
  }

  // Dealiased d dbar of the state spectrum.
  void hessians(const CVec& uhat, HessianField& out) {
    out.n = n_;
    out.total = total_;
    out.h.resize(total_ * n_ * n_);
    CVec tmp(total_), phys(total_);
    for (const auto& [j, k] : pairs_) {
      const CVec& sym = sigma_[pair_index(j, k)];
      for (std::size_t i = 0; i < total_; ++i) tmp[i] = sym[i] * uhat[i];
      grid_.backward(tmp.data(), phys.data());
      for (std::size_t i = 0; i < total_; ++i) {
        if (j == k) {
          out.h[(i * n_ + j) * n_ + j] = phys[i].real();
        } else {
          out.h[(i * n_ + j) * n_ + k] = phys[i];
          out.h[(i * n_ + k) * n_ + j] = std::conj(phys[i]);
        }
      }
    }
  }

  // Pointwise sweep: lifted angle, residual against theta_target, |det|
  // accumulation. rhs (Theta - theta_target) and theta output fields are
  // optional.
  SweepStats sweep(const HessianField& hess, double theta_target, Field* rhs,
                   Field* theta_out) const {
    const std::size_t blocks = block_count(total_, kSweepBlock);
    std::vector<SweepStats> partial(blocks);
    parallel_blocks(total_, kSweepBlock,
                    [&](std::size_t b, std::size_t begin, std::size_t end) {
                      SweepStats st;
                      for (std::size_t i = begin; i < end; ++i) {
                        const auto [theta, absdet] = point_theta_det(hess, i);
                        st.sup = std::max(st.sup, theta);
                        st.inf = std::min(st.inf, theta);
                        const double r = theta - theta_target;
                        st.max_residual = std::max(st.max_residual, std::abs(r));
                        st.volume_sum += absdet;
                        if (rhs) (*rhs)[i] = r;
                        if (theta_out) (*theta_out)[i] = theta;
                      }
                      partial[b] = st;
                    });
    SweepStats out;
    for (const auto& st : partial) {
      out.sup = std::max(out.sup, st.sup);
      out.inf = std::min(out.inf, st.inf);
      out.max_residual = std::max(out.max_residual, st.max_residual);
      out.volume_sum += st.volume_sum;  // fixed block order keeps this deterministic
    }
    return out;
  }

  // Lifted angle and |det(omega0 + i alpha)| at one grid point.
  std::pair<double, double> point_theta_det(const HessianField& hess, std::size_t i) const {
    if (n_ == 1) {
      const double a = a0_scalar_ + hess.h[i].real();
      const double lambda = a * w_inv_scalar_;
      return {std::atan(lambda), std::hypot(w_scalar_, a)};
    }
    const double a = a0_00_ + hess.h[i * 4].real();
    const std::complex<double> b = a0_01_ + hess.h[i * 4 + 1];
    const double d = a0_11_ + hess.h[i * 4 + 3].real();
    // Reduced form M = L^{-1} alpha L^{-*} with L^{-1} = [[p, 0], [q, r]].
    const double m00 = p_ * p_ * a;
    const std::complex<double> m01 = p_ * (a * std::conj(q_) + b * r_);
    const double m11 = a * std::norm(q_) + 2.0 * r_ * (q_ * b).real() + r_ * r_ * d;
    const double mean = 0.5 * (m00 + m11);
    const double disc = std::hypot(0.5 * (m00 - m11), std::abs(m01));
    const double theta = std::atan(mean - disc) + std::atan(mean + disc);
    const std::complex<double> k00(w00_, a);
    const std::complex<double> k11(w11_, d);
    const std::complex<double> k01 = w01_ + std::complex<double>(0.0, 1.0) * b;
    const std::complex<double> k10 = std::conj(w01_) + std::complex<double>(0.0, 1.0) * std::conj(b);
    return {theta, std::abs(k00 * k11 - k01 * k10)};
  }

  // Masked, math-normalized forward transform of a physical field.
  void masked_forward(const Field& f, CVec& out) {
    CVec in(total_);
    for (std::size_t i = 0; i < total_; ++i) in[i] = f[i];
    out.resize(total_);
    grid_.forward(in.data(), out.data());
    const double inv = 1.0 / static_cast<double>(total_);
    for (std::size_t i = 0; i < total_; ++i) out[i] = mask_[i] ? out[i] * inv : 0.0;
  }

  const std::vector<char>& mask() const { return mask_; }

 private:
  int pair_index(int j, int k) const { return j == 0 ? k : 2; }  // pairs (0,0),(0,1),(1,1)

  void build_symbols() {
    const int cutoff = N_ / 3;
    mask_.assign(total_, 1);
    pairs_.clear();
    for (int j = 0; j < n_; ++j) {
      for (int k = j; k < n_; ++k) pairs_.push_back({j, k});
    }
    sigma_.assign(pairs_.size(), CVec(total_));
    std::vector<int> digit(2 * n_);
    const double pi = std::numbers::pi;
    for (std::size_t idx = 0; idx < total_; ++idx) {
      std::size_t rem = idx;
      for (int d = 2 * n_ - 1; d >= 0; --d) {
        digit[d] = static_cast<int>(rem % N_);
        rem /= N_;
      }
      bool in_band = true;
      std::vector<int> m(2 * n_);
      for (int d = 0; d < 2 * n_; ++d) {
        m[d] = grid_.freq(digit[d]);
        if (std::abs(m[d]) > cutoff) in_band = false;
      }
      mask_[idx] = in_band ? 1 : 0;
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        if (!in_band) {
          sigma_[p][idx] = 0.0;
          continue;
        }
        const auto [j, k] = pairs_[p];
        const std::complex<double> sj(pi * m[n_ + j], pi * m[j]);
        const std::complex<double> sbar_k(-pi * m[n_ + k], pi * m[k]);
        sigma_[p][idx] = sj * sbar_k;
      }
    }
  }

  void build_engine() {
    if (n_ == 1) {
      w_scalar_ = bg_.omega0(0, 0).real();
      w_inv_scalar_ = 1.0 / w_scalar_;
      a0_scalar_ = bg_.alpha0(0, 0).real();
      return;
    }
    Eigen::LLT<Eigen::Matrix2cd> llt(bg_.omega0);
    const Eigen::Matrix2cd L = llt.matrixL();
    p_ = 1.0 / L(0, 0).real();
    r_ = 1.0 / L(1, 1).real();
    q_ = -L(1, 0) * p_ * r_;
    a0_00_ = bg_.alpha0(0, 0).real();
    a0_01_ = bg_.alpha0(0, 1);
    a0_11_ = bg_.alpha0(1, 1).real();
    w00_ = bg_.omega0(0, 0).real();
    w01_ = bg_.omega0(0, 1);
    w11_ = bg_.omega0(1, 1).real();
  }

  const TorusBackground& bg_;
  SpectralGrid grid_;
  std::size_t total_;
  int n_, N_;
  std::vector<char> mask_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<CVec> sigma_;
  // n = 1 engine
  double w_scalar_ = 0.0, w_inv_scalar_ = 0.0, a0_scalar_ = 0.0;
  // n = 2 engine
  double p_ = 0.0, r_ = 0.0;
  std::complex<double> q_;
  double a0_00_ = 0.0, a0_11_ = 0.0;
  std::complex<double> a0_01_;
  double w00_ = 0.0, w11_ = 0.0;
  std::complex<double> w01_;
};

double sum_abs(const CVec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::abs(z);
  return s;
}

double lambda_min(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_field(const Field& u, const TorusBackground& bg, const char* what) {
  if (u.size() != bg.total()) {
    throw DimensionMismatch(std::string(what) + ": field size does not match the grid");
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite field value");
  }
}

}  // namespace

TorusBackground::TorusBackground(int n_in, int N_in, Eigen::MatrixXcd omega0_in,
                                 Eigen::MatrixXcd alpha0_in)
    : n(n_in), N(N_in), omega0(std::move(omega0_in)), alpha0(std::move(alpha0_in)) {
  if (n != 1 && n != 2) {
    throw DimensionMismatch("TorusBackground: complex dimension must be 1 or 2");
  }
  if (N < 8 || N % 2 != 0) {
    throw DimensionMismatch("TorusBackground: N must be even and >= 8");
  }
  if (omega0.rows() != n || omega0.cols() != n || alpha0.rows() != n || alpha0.cols() != n) {
    throw DimensionMismatch("TorusBackground: omega0 and alpha0 must be n x n");
  }
  // Validates Hermiticity of both forms and positive definiteness of omega0;
  // symmetrize to absorb round-off.
  spectral::HermitianPencil pencil(omega0, alpha0);
  spectral::PencilReducer reducer(pencil.omega);
  omega0 = pencil.omega;
  alpha0 = pencil.alpha;
}

std::size_t TorusBackground::total() const {
  std::size_t t = 1;
  for (int d = 0; d < 2 * n; ++d) t *= static_cast<std::size_t>(N);
  return t;
}

Field make_field(const TorusBackground& bg) { return Field(bg.total(), 0.0); }

std::vector<double> grid_point(const TorusBackground& bg, std::size_t index) {
  std::vector<double> x(2 * bg.n);
  for (int d = 2 * bg.n - 1; d >= 0; --d) {
    x[d] = static_cast<double>(index % bg.N) / bg.N;
    index /= bg.N;
  }
  return x;
}

HessianField complex_hessian(const Field& u, const TorusBackground& bg) {
  check_field(u, bg, "complex_hessian");
  Workspace ws(bg);
  const CVec uhat = ws.spectrum(u);
  HessianField out;
  ws.hessians(uhat, out);
  out.alias_warning = ws.alias_tail_large(uhat);
  return out;
}

Field theta_field(const Field& u, const TorusBackground& bg) {
  check_field(u, bg, "theta_field");
  Workspace ws(bg);
  const CVec uhat = ws.spectrum(u);
  HessianField hess;
  ws.hessians(uhat, hess);
  Field theta(bg.total());
  ws.sweep(hess, 0.0, nullptr, &theta);
  return theta;
}

double theta_auto(const TorusBackground& bg) {
  const auto s = spectral::PencilReducer(bg.omega0).eigenvalues(bg.alpha0);
  return spectral::angle_and_radius(s).theta;
}

double r_hat_value(const TorusBackground& bg) {
  const Eigen::MatrixXcd k =
      bg.omega0 + std::complex<double>(0.0, 1.0) * bg.alpha0;
  return std::abs(k.determinant());
}

double volume_functional(const Field& u, const TorusBackground& bg) {
  check_field(u, bg, "volume_functional");
  Workspace ws(bg);
  const CVec uhat = ws.spectrum(u);
  HessianField hess;
  ws.hessians(uhat, hess);
  const SweepStats st = ws.sweep(hess, 0.0, nullptr, nullptr);
  return st.volume_sum / static_cast<double>(ws.total());
}

FlowTrace run_flow(const TorusBackground& bg, const Field& u0, const FlowConfig& cfg) {
  check_field(u0, bg, "run_flow");
  if (cfg.max_steps < 0) throw Error("FlowConfig: max_steps must be >= 0");
  if (cfg.tol <= 0.0) throw Error("FlowConfig: tol must be positive");
  if (cfg.cfl <= 0.0) throw Error("FlowConfig: cfl must be positive");

  Workspace ws(bg);
  const std::size_t total = ws.total();
  const double inv_total = 1.0 / static_cast<double>(total);

  FlowTrace trace;
  trace.theta_target = cfg.theta ? *cfg.theta : theta_auto(bg);
  trace.r_hat = r_hat_value(bg);
  const double parabolic = bg.h() * bg.h() * lambda_min(bg.omega0);
  trace.dt = cfg.dt > 0.0 ? cfg.dt : cfg.cfl * parabolic;
  trace.cfl_ok = trace.dt <= 0.25 * parabolic * (1.0 + 1e-9);

  CVec uhat = ws.spectrum(u0);
  trace.alias_warning = ws.alias_tail_large(uhat);
  uhat[0] = 0.0;  // mean normalization of the initial data

  HessianField hess;
  Field rhs(total);
  CVec k1, k2, k3, k4, stage;

  auto rhs_hat = [&](const CVec& state, CVec& out) {
    ws.hessians(state, hess);
    ws.sweep(hess, trace.theta_target, &rhs, nullptr);
    ws.masked_forward(rhs, out);
  };

  long step = 0;
  while (true) {
    ws.hessians(uhat, hess);
    const SweepStats st = ws.sweep(hess, trace.theta_target, &rhs, nullptr);
    trace.records.push_back(
        {step, st.sup, st.inf, st.max_residual, st.volume_sum * inv_total});
    if (!std::isfinite(st.max_residual)) {
      trace.status = FlowStatus::Diverged;
      break;
    }
    if (st.max_residual <= cfg.tol) {
      trace.status = FlowStatus::Converged;
      break;
    }
    if (step >= cfg.max_steps) {
      trace.status = FlowStatus::NotConverged;
      break;
    }

    if (cfg.stepper == Stepper::Euler) {
      ws.masked_forward(rhs, k1);
      for (std::size_t i = 0; i < total; ++i) uhat[i] += trace.dt * k1[i];
    } else {
      // Classical four-stage scheme on the spectral state; each stage uses the
      // same dealiased right-hand side as the Euler step.
      ws.masked_forward(rhs, k1);
      stage.resize(total);
      for (std::size_t i = 0; i < total; ++i) stage[i] = uhat[i] + 0.5 * trace.dt * k1[i];
      stage[0] = 0.0;
      rhs_hat(stage, k2);
      for (std::size_t i = 0; i < total; ++i) stage[i] = uhat[i] + 0.5 * trace.dt * k2[i];
      stage[0] = 0.0;
      rhs_hat(stage, k3);
      for (std::size_t i = 0; i < total; ++i) stage[i] = uhat[i] + trace.dt * k3[i];
      stage[0] = 0.0;
      rhs_hat(stage, k4);
      for (std::size_t i = 0; i < total; ++i) {
        uhat[i] += trace.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    uhat[0] = 0.0;
    ++step;

    // sup|u| <= sum |uhat|, so the cheap bound filters most steps; only
    // materialize when the guard could actually trip.
    const double bound = sum_abs(uhat);
    if (!std::isfinite(bound)) {
      trace.status = FlowStatus::Diverged;
      break;
    }
    if (bound > kDivergenceGuard) {
      const Field u = ws.materialize(uhat);
      double sup = 0.0;
      for (double v : u) sup = std::max(sup, std::abs(v));
      if (sup > kDivergenceGuard) {
        trace.status = FlowStatus::Diverged;
        break;
      }
    }
  }

  trace.steps_taken = step;
  trace.final_u = ws.materialize(uhat);
  return trace;
}

double uniqueness_check(const TorusBackground& bg, const Field& u0_a, const Field& u0_b,
                        const FlowConfig& cfg) {
  const FlowTrace a = run_flow(bg, u0_a, cfg);
  const FlowTrace b = run_flow(bg, u0_b, cfg);
  for (const auto* t : {&a, &b}) {
    if (t->status == FlowStatus::Diverged) {
      throw Diverged("uniqueness_check: a flow diverged");
    }
    if (t->status != FlowStatus::Converged) {
      throw NotConverged("uniqueness_check: a flow did not converge within max_steps");
    }
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < a.final_u.size(); ++i) mean += a.final_u[i] - b.final_u[i];
  mean /= static_cast<double>(a.final_u.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < a.final_u.size(); ++i) {
    gap = std::max(gap, std::abs(a.final_u[i] - b.final_u[i] - mean));
  }
  return gap;
}

double min_ellipticity_witness(const Field& u, const TorusBackground& bg) {
  check_field(u, bg, "min_ellipticity_witness");
  Workspace ws(bg);
  HessianField hess;
  ws.hessians(ws.spectrum(u), hess);

  Eigen::LLT<Eigen::MatrixXcd> llt(bg.omega0);
  const Eigen::MatrixXcd L = llt.matrixL();
  const Eigen::MatrixXcd Li = L.inverse();
  double min_eig = std::numeric_limits<double>::infinity();
  const int n = bg.n;
  Eigen::MatrixXcd alpha(n, n), m(n, n), g(n, n);
  for (std::size_t i = 0; i < ws.total(); ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) alpha(j, k) = bg.alpha0(j, k) + hess.at(i, j, k);
    }
    m = Li * alpha * Li.adjoint();
    g = Li.adjoint() * (Eigen::MatrixXcd::Identity(n, n) + m * m).inverse() * Li;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (g + g.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  return min_eig;
}

double first_variation(const Field& u, const Field& delta, const TorusBackground& bg) {
  check_field(u, bg, "first_variation");
  check_field(delta, bg, "first_variation");
  Workspace ws(bg);
  HessianField hu, hd;
  ws.hessians(ws.spectrum(u), hu);
  ws.hessians(ws.spectrum(delta), hd);

  const int n = bg.n;
  double sum = 0.0;
  if (n == 1) {
    const double w = bg.omega0(0, 0).real();
    const double a0 = bg.alpha0(0, 0).real();
    for (std::size_t i = 0; i < ws.total(); ++i) {
      const std::complex<double> k(w, a0 + hu.h[i].real());
      const std::complex<double> trace = hd.h[i] / k;
      sum += -std::abs(k) * trace.imag();
    }
  } else {
    const std::complex<double> iu(0.0, 1.0);
    for (std::size_t i = 0; i < ws.total(); ++i) {
      const std::complex<double> k00 = bg.omega0(0, 0) + iu * (bg.alpha0(0, 0) + hu.at(i, 0, 0));
      const std::complex<double> k01 = bg.omega0(0, 1) + iu * (bg.alpha0(0, 1) + hu.at(i, 0, 1));
      const std::complex<double> k10 = bg.omega0(1, 0) + iu * (bg.alpha0(1, 0) + hu.at(i, 1, 0));
      const std::complex<double> k11 = bg.omega0(1, 1) + iu * (bg.alpha0(1, 1) + hu.at(i, 1, 1));
      const std::complex<double> det = k00 * k11 - k01 * k10;
      const std::complex<double> tr_adj = k11 * hd.at(i, 0, 0) - k01 * hd.at(i, 1, 0) -
                                          k10 * hd.at(i, 0, 1) + k00 * hd.at(i, 1, 1);
      sum += -std::abs(det) * (tr_adj / det).imag();
    }
  }
  return sum / static_cast<double>(ws.total());
}

}  // namespace dhym::flow
