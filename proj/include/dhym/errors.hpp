#pragma once

#include <stdexcept>
#include <string>

namespace dhym {

// Base class for all recoverable computation failures. The CLI maps subclasses
// to exit codes: invariant violations exit 3, OriginCrossing 4, Diverged 5,
// NotConverged 6.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix argument required to be (conjugate-)symmetric exceeded the
// symmetry tolerance.
class NonHermitianInput final : public Error {
 public:
  using Error::Error;
};

// A background form that must be positive definite failed its Cholesky
// factorization.
class NotPositiveDefinite final : public Error {
 public:
  using Error::Error;
};

// Sizes of inputs are inconsistent with each other or with the operation's
// required dimension.
class DimensionMismatch final : public Error {
 public:
  using Error::Error;
};

// |cos(theta)| is too small for a tangent-based identity to be well posed.
class NearVerticalPhase final : public Error {
 public:
  using Error::Error;
};

// An operation requiring strictly positive eigenvalues received a spectrum
// with a non-positive entry.
class NonKahlerSpectrum final : public Error {
 public:
  using Error::Error;
};

// The ambient charge Z_X vanishes, so phase comparisons against it are
// undefined.
class ZeroAmbientCharge final : public Error {
 public:
  using Error::Error;
};

// A pairing that must be positive (a volume) is zero or negative.
class NonPositiveVolume final : public Error {
 public:
  using Error::Error;
};

// Adaptive step halving went below the hard floor without making progress.
class StepUnderflow final : public Error {
 public:
  using Error::Error;
};

// A sample point lies outside the declared box domain.
class OutOfDomain final : public Error {
 public:
  using Error::Error;
};

// The Hessian of the convex potential is singular or not positive definite
// at a sample point.
class SingularHessian final : public Error {
 public:
  using Error::Error;
};

// The section derivative matrix fails the closedness (gradient-section)
// symmetry test; the input is not the graph of a potential.
class LagrangianViolation final : public Error {
 public:
  using Error::Error;
};

// The charge path passed through (or too near) the origin, so the lifted
// angle is undefined. Carries the crossing parameter t.
class OriginCrossing final : public Error {
 public:
  OriginCrossing(double t_cross, const std::string& what) : Error(what), t(t_cross) {}
  double t;
};

// A flow state exceeded the blow-up guard.
class Diverged final : public Error {
 public:
  using Error::Error;
};

// A flow hit its step budget before reaching tolerance.
class NotConverged final : public Error {
 public:
  using Error::Error;
};

}  // namespace dhym
