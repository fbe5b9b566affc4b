#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <iostream>
#include <stdexcept>
#include <string>

namespace homog {

using Real = double;
using Complex = std::complex<double>;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using ComplexSparseMatrix = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<double>;

/// A point in R^d, d in {1,2}.
using Point = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define HOMOG_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(what) {}       \
  }

HOMOG_DEFINE_ERROR(DegenerateLatticeError);
HOMOG_DEFINE_ERROR(EllipticityError);
HOMOG_DEFINE_ERROR(CoefficientError);
HOMOG_DEFINE_ERROR(SolverError);
HOMOG_DEFINE_ERROR(MeshingError);
HOMOG_DEFINE_ERROR(ResolutionError);
HOMOG_DEFINE_ERROR(ExtensionError);
HOMOG_DEFINE_ERROR(DomainError);
HOMOG_DEFINE_ERROR(SingularResolventError);
HOMOG_DEFINE_ERROR(MissingNodeError);
HOMOG_DEFINE_ERROR(FitError);
HOMOG_DEFINE_ERROR(BudgetError);
HOMOG_DEFINE_ERROR(ConfigError);

#undef HOMOG_DEFINE_ERROR

namespace detail {

inline bool& warnings_enabled() {
  static bool enabled = true;
  return enabled;
}

}  // namespace detail

inline void set_warnings_enabled(bool on) { detail::warnings_enabled() = on; }

inline void warn(const std::string& message) {
  if (detail::warnings_enabled()) std::cerr << "homog: warning: " << message << '\n';
}

enum class BoundaryKind { dirichlet, neumann };

inline const char* to_string(BoundaryKind bc) {
  return bc == BoundaryKind::dirichlet ? "dirichlet" : "neumann";
}

inline BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::dirichlet;
  if (s == "neumann") return BoundaryKind::neumann;
  throw ConfigError("unknown boundary kind '" + s + "' (expected dirichlet|neumann)");
}

/// Smallest and largest eigenvalue of the symmetric part of a square matrix.
inline std::pair<Real, Real> eigen_range(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace homog
