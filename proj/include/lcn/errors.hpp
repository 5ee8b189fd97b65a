#pragma once

#include <stdexcept>
#include <string>

namespace lcn {

/// Material parameters outside the physical range (s or s0 not > -1, |m| != 1).
struct InvalidMaterialError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Element whose deformation gradient has det(F^T F) below the floor.
struct DegenerateElementError : std::runtime_error {
  DegenerateElementError(int element_, double jacobian_)
      : std::runtime_error("degenerate element " + std::to_string(element_) +
                           ": det(F^T F) = " + std::to_string(jacobian_)),
        element(element_), jacobian(jacobian_) {}
  int element;
  double jacobian;
};

/// Crease segment not representable by mesh edges at the requested resolution.
struct UnfittedCreaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric factorization hit an indefinite pivot.
struct NotSpdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Linear system is numerically singular.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Newton sub-iteration failed (indefinite system, growing residual, or cap).
struct DivergedNewtonError : std::runtime_error {
  DivergedNewtonError(const std::string& what_, int iteration_)
      : std::runtime_error(what_ + " (newton iteration " +
                           std::to_string(iteration_) + ")"),
        iteration(iteration_) {}
  int iteration;
};

/// Initializer produced a non-finite nodal value.
struct InvalidInitializerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Director preset evaluated at its singular point.
struct SingularDirectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// tau doubling exceeded its cap without finding a diverging run.
struct NoDivergingTauError : std::runtime_error {
  explicit NoDivergingTauError(double cap_)
      : std::runtime_error("no diverging tau found up to cap " +
                           std::to_string(cap_)),
        cap(cap_) {}
  double cap;
};

}  // namespace lcn
