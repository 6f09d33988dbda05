// Copyright 2026 The VBSE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vbse/errors.hpp"

namespace vbse {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Throws contract_violation if any entry is NaN or infinite.
void require_finite(const ComplexMatrix& a, std::string_view what);

/// Largest absolute entry.
double max_abs(const ComplexMatrix& a);

bool is_hermitian(const ComplexMatrix& a, double tol);
bool is_anti_hermitian(const ComplexMatrix& a, double tol);

struct EigenDecomposition {
  RealVector values;     // ascending
  ComplexMatrix vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix (entrywise Hermitian within 1e-10).
EigenDecomposition hermitian_eig(const ComplexMatrix& a);

/// Orthonormal basis for the column span of `c` with the R factor's diagonal
/// made real positive, so an already orthonormal input comes back unchanged.
/// Throws degenerate_basis when the smallest singular value is <= 1e-12.
ComplexMatrix qr_orthonormalize(const ComplexMatrix& c);

/// exp(a). Hermitian and anti-Hermitian inputs go through the
/// eigendecomposition; everything else through scaling and squaring.
ComplexMatrix matrix_exp(const ComplexMatrix& a);

// ---------------------------------------------------------------------------
// Nonlinear root finding (spectral residual method, DF-SANE family).

using ResidualFunction = std::function<RealVector(const RealVector&)>;

struct DfSaneOptions {
  int max_iterations = 2000;
  int memory = 10;  // non-monotone line search window
  double gamma = 1e-4;
  double tau_min = 0.1;
  double tau_max = 0.5;
  double sigma_eps = 1e-10;
  int max_line_search = 60;
};

struct RootReport {
  RealVector x;  // best iterate when not converged
  double residual_inf = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Finds x with ||residual(x)||_inf <= tol. Never throws on non-convergence:
/// the report carries the best iterate seen and `converged == false`.
RootReport solve_nonlinear(const ResidualFunction& residual, const RealVector& x0, double tol,
                           const DfSaneOptions& options = {});

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) integration of complex ODE systems.

using ComplexOde = std::function<ComplexVector(double, const ComplexVector&)>;

struct Rk45Options {
  double rtol = 1e-8;
  double atol = 1e-10;
  double first_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;
};

struct OdeSample {
  double t;
  ComplexVector y;
};

/// Raised when the step size underflows; carries the last accepted state.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& message, double t, ComplexVector last)
      : Error(ErrorCode::stiffness, message), t_(t), last_(std::move(last)) {}
  double time() const noexcept { return t_; }
  const ComplexVector& last_state() const noexcept { return last_; }

 private:
  double t_;
  ComplexVector last_;
};

struct Rk45Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Integrates y' = f(t, y) from t_span.first to t_span.second and returns the
/// state at each requested sample time (sorted, inside the span). Steps are
/// clipped so every sample is hit exactly.
std::vector<OdeSample> rk45_integrate(const ComplexOde& derivative, const ComplexVector& y0,
                                      std::pair<double, double> t_span,
                                      std::span<const double> sample_times,
                                      const Rk45Options& options = {}, Rk45Stats* stats = nullptr);

// ---------------------------------------------------------------------------
// Quasi-Newton minimization.

/// Objective returning f(x) and writing the gradient into `grad`.
using ObjectiveWithGradient = std::function<double(const RealVector& x, RealVector& grad)>;

struct MinimizeReport {
  RealVector x;
  double value = 0.0;
  RealVector gradient;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// BFGS with a strong-Wolfe line search. Stops when ||grad||_inf <= gtol or
/// after max_iterations.
MinimizeReport minimize_bfgs(const ObjectiveWithGradient& objective, const RealVector& x0,
                             double gtol, int max_iterations);

}  // namespace vbse
