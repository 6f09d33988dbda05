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

#include "vbse/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace vbse {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::contract_violation: return "contract_violation";
    case ErrorCode::degenerate_basis: return "degenerate_basis";
    case ErrorCode::truncation: return "truncation";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::resource: return "resource";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::stiffness: return "stiffness";
    case ErrorCode::state_corruption: return "state_corruption";
    case ErrorCode::hermiticity: return "hermiticity";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

void require_finite(const ComplexMatrix& a, std::string_view what) {
  if (!a.allFinite()) {
    fail(ErrorCode::contract_violation, std::string(what) + ": non-finite entry");
  }
}

double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  return a.rows() == a.cols() && max_abs(a - a.adjoint()) <= tol;
}

bool is_anti_hermitian(const ComplexMatrix& a, double tol) {
  return a.rows() == a.cols() && max_abs(a + a.adjoint()) <= tol;
}

EigenDecomposition hermitian_eig(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), ErrorCode::contract_violation, "hermitian_eig: matrix not square");
  require_finite(a, "hermitian_eig");
  require(is_hermitian(a, 1e-10), ErrorCode::contract_violation,
          "hermitian_eig: matrix not Hermitian within 1e-10");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
  require(solver.info() == Eigen::Success, ErrorCode::convergence,
          "hermitian_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix qr_orthonormalize(const ComplexMatrix& c) {
  require(c.cols() <= c.rows(), ErrorCode::contract_violation,
          "qr_orthonormalize: more columns than rows");
  require_finite(c, "qr_orthonormalize");
  if (c.cols() == 0) return c;
  Eigen::JacobiSVD<ComplexMatrix> svd(c);
  const double smallest = svd.singularValues()(c.cols() - 1);
  if (!(smallest > 1e-12)) {
    std::ostringstream msg;
    msg << "qr_orthonormalize: columns linearly dependent (smallest singular value " << smallest
        << ")";
    fail(ErrorCode::degenerate_basis, msg.str());
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(c);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(c.rows(), c.cols());
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const cplx d = r(j, j);
    q.col(j) *= d / std::abs(d);
  }
  return q;
}

ComplexMatrix matrix_exp(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), ErrorCode::contract_violation, "matrix_exp: matrix not square");
  require_finite(a, "matrix_exp");
  if (a.size() == 0) return a;
  const double tol = 1e-13 * std::max(1.0, max_abs(a));
  if (is_anti_hermitian(a, tol)) {
    // a = -iH with H Hermitian
    ComplexMatrix h = kI * a;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    const ComplexVector phases =
        (-kI * solver.eigenvalues().cast<cplx>()).array().exp().matrix();
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
  }
  if (is_hermitian(a, tol)) {
    ComplexMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    const RealVector w = solver.eigenvalues().array().exp().matrix();
    return solver.eigenvectors() * w.cast<cplx>().asDiagonal() * solver.eigenvectors().adjoint();
  }
  return a.exp();
}

// ---------------------------------------------------------------------------

namespace {

double inf_norm(const RealVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

RootReport solve_nonlinear(const ResidualFunction& residual, const RealVector& x0, double tol,
                           const DfSaneOptions& options) {
  RootReport report;
  RealVector x = x0;
  RealVector f_vec = residual(x);
  ++report.evaluations;
  require(f_vec.allFinite(), ErrorCode::contract_violation,
          "solve_nonlinear: residual not finite at the initial guess");
  double merit = f_vec.squaredNorm();
  const double eta0 = merit;

  report.x = x;
  report.residual_inf = inf_norm(f_vec);

  std::deque<double> history{merit};
  double sigma = 1.0;

  for (int k = 0; k < options.max_iterations; ++k) {
    const double res = inf_norm(f_vec);
    if (res < report.residual_inf) {
      report.residual_inf = res;
      report.x = x;
    }
    if (res <= tol) {
      report.converged = true;
      report.x = x;
      report.residual_inf = res;
      report.iterations = k;
      return report;
    }

    const RealVector d = -sigma * f_vec;
    const double eta = eta0 / ((k + 1.0) * (k + 1.0));
    const double f_bar = *std::max_element(history.begin(), history.end());

    double alpha_p = 1.0;
    double alpha_m = 1.0;
    RealVector x_new;
    RealVector f_new;
    double merit_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      RealVector xp = x + alpha_p * d;
      RealVector fp = residual(xp);
      ++report.evaluations;
      double mp = fp.allFinite() ? fp.squaredNorm() : std::numeric_limits<double>::infinity();
      if (mp <= f_bar + eta - options.gamma * alpha_p * alpha_p * merit) {
        x_new = std::move(xp);
        f_new = std::move(fp);
        merit_new = mp;
        accepted = true;
        break;
      }
      RealVector xm = x - alpha_m * d;
      RealVector fm = residual(xm);
      ++report.evaluations;
      double mm = fm.allFinite() ? fm.squaredNorm() : std::numeric_limits<double>::infinity();
      if (mm <= f_bar + eta - options.gamma * alpha_m * alpha_m * merit) {
        x_new = std::move(xm);
        f_new = std::move(fm);
        merit_new = mm;
        accepted = true;
        break;
      }
      auto next_alpha = [&](double alpha, double m_trial) {
        double trial = alpha * alpha * merit / (m_trial + (2.0 * alpha - 1.0) * merit);
        if (!std::isfinite(trial)) trial = options.tau_min * alpha;
        return std::clamp(trial, options.tau_min * alpha, options.tau_max * alpha);
      };
      alpha_p = next_alpha(alpha_p, mp);
      alpha_m = next_alpha(alpha_m, mm);
    }
    if (!accepted) {
      report.iterations = k + 1;
      return report;
    }

    const RealVector s = x_new - x;
    const RealVector y = f_new - f_vec;
    const double sy = s.dot(y);
    sigma = sy != 0.0 ? s.squaredNorm() / sy : std::numeric_limits<double>::infinity();
    if (!std::isfinite(sigma) || std::abs(sigma) < options.sigma_eps ||
        std::abs(sigma) > 1.0 / options.sigma_eps) {
      const double fn = std::sqrt(merit_new);
      if (fn > 1.0) {
        sigma = 1.0;
      } else if (fn >= 1e-5) {
        sigma = 1.0 / fn;
      } else {
        sigma = 1e5;
      }
    }

    x = std::move(x_new);
    f_vec = std::move(f_new);
    merit = merit_new;
    history.push_back(merit);
    if (static_cast<int>(history.size()) > options.memory) history.pop_front();
    report.iterations = k + 1;
  }
  const double res = inf_norm(f_vec);
  if (res < report.residual_inf) {
    report.residual_inf = res;
    report.x = x;
  }
  report.converged = report.residual_inf <= tol;
  return report;
}

// ---------------------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kE[7] = {71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

double scaled_rms(const ComplexVector& e, const ComplexVector& y0, const ComplexVector& y1,
                  double rtol, double atol) {
  if (e.size() == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = std::abs(e(i)) / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(e.size()));
}

double initial_step(const ComplexOde& f, double t0, const ComplexVector& y0,
                    const ComplexVector& f0, double direction_span, const Rk45Options& opt,
                    long& evals) {
  if (y0.size() == 0) return direction_span;
  auto rms = [&](const ComplexVector& v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double scale = opt.atol + opt.rtol * std::abs(y0(i));
      acc += std::norm(v(i)) / (scale * scale);
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  const double d0 = rms(y0);
  const double d1 = rms(f0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, direction_span);
  const ComplexVector y1 = y0 + h0 * f0;
  const ComplexVector f1 = f(t0 + h0, y1);
  ++evals;
  const double d2 = rms(f1 - f0) / h0;
  double h1;
  if (d1 <= 1e-15 && d2 <= 1e-15) {
    h1 = std::max(1e-6, h0 * 1e-3);
  } else {
    h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
  }
  return std::min({100 * h0, h1, direction_span});
}

}  // namespace

std::vector<OdeSample> rk45_integrate(const ComplexOde& derivative, const ComplexVector& y0,
                                      std::pair<double, double> t_span,
                                      std::span<const double> sample_times,
                                      const Rk45Options& options, Rk45Stats* stats) {
  const auto [t0, t1] = t_span;
  require(t1 >= t0, ErrorCode::contract_violation, "rk45_integrate: t1 < t0");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    require(sample_times[i] >= t0 - 1e-14 && sample_times[i] <= t1 + 1e-14,
            ErrorCode::contract_violation, "rk45_integrate: sample time outside span");
    require(i == 0 || sample_times[i] >= sample_times[i - 1], ErrorCode::contract_violation,
            "rk45_integrate: sample times not sorted");
  }

  Rk45Stats local;
  std::vector<OdeSample> out;
  out.reserve(sample_times.size());
  std::size_t next_sample = 0;

  double t = t0;
  ComplexVector y = y0;
  while (next_sample < sample_times.size() && sample_times[next_sample] <= t + 1e-14) {
    out.push_back({sample_times[next_sample], y});
    ++next_sample;
  }
  if (next_sample == sample_times.size() || t1 == t0) {
    if (stats) *stats = local;
    return out;
  }

  ComplexVector k[7];
  k[0] = derivative(t, y);
  ++local.evaluations;
  require(k[0].allFinite(), ErrorCode::contract_violation,
          "rk45_integrate: derivative not finite at t0");

  double h = options.first_step > 0.0
                 ? options.first_step
                 : initial_step(derivative, t, y, k[0], t1 - t0, options, local.evaluations);
  h = std::min(h, options.max_step);

  const double t_final = sample_times.back();
  long steps = 0;
  while (t < t_final) {
    const double target = sample_times[next_sample];
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < min_step) {
      std::ostringstream msg;
      msg << "rk45_integrate: step size underflow at t=" << t;
      throw StiffnessError(msg.str(), t, y);
    }
    if (++steps > options.max_steps) {
      throw StiffnessError("rk45_integrate: step budget exhausted", t, y);
    }
    bool hit_target = false;
    double step = h;
    if (t + step >= target) {
      step = target - t;
      hit_target = true;
    }

    for (int s = 1; s < 7; ++s) {
      ComplexVector ys = y;
      for (int j = 0; j < s; ++j) {
        if (kA[s][j] != 0.0) ys.noalias() += (step * kA[s][j]) * k[j];
      }
      k[s] = derivative(t + kC[s] * step, ys);
      ++local.evaluations;
    }
    ComplexVector y_new = y;
    for (int j = 0; j < 6; ++j) {
      if (kA[6][j] != 0.0) y_new.noalias() += (step * kA[6][j]) * k[j];
    }
    // k[6] was evaluated at y_new (FSAL).
    ComplexVector err = ComplexVector::Zero(y.size());
    for (int j = 0; j < 7; ++j) {
      if (kE[j] != 0.0) err.noalias() += (step * kE[j]) * k[j];
    }
    double err_norm = k[6].allFinite() ? scaled_rms(err, y, y_new, options.rtol, options.atol)
                                       : std::numeric_limits<double>::infinity();

    if (err_norm <= 1.0) {
      ++local.accepted;
      t = hit_target ? target : t + step;
      y = std::move(y_new);
      k[0] = k[6];
      double factor = err_norm == 0.0 ? 10.0 : std::min(10.0, 0.9 * std::pow(err_norm, -0.2));
      // A step clipped to a sample time must not shrink the nominal step.
      const double proposal = step * factor;
      h = std::min(options.max_step, hit_target ? std::max(proposal, h) : proposal);
      while (next_sample < sample_times.size() && sample_times[next_sample] <= t + 1e-14) {
        out.push_back({sample_times[next_sample], y});
        ++next_sample;
      }
      if (next_sample == sample_times.size()) break;
    } else {
      ++local.rejected;
      const double factor =
          std::isfinite(err_norm) ? std::max(0.2, 0.9 * std::pow(err_norm, -0.2)) : 0.2;
      h = step * factor;
    }
  }
  if (stats) *stats = local;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct LinePoint {
  double alpha;
  double f;
  double slope;
  RealVector x;
  RealVector g;
};

double cubic_min(double a, double fa, double ga, double b, double fb, double gb) {
  // Minimizer of the cubic interpolating (a, fa, ga), (b, fb, gb).
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  if (disc < 0.0) return 0.5 * (a + b);
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double t = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
  if (!std::isfinite(t)) return 0.5 * (a + b);
  return t;
}

}  // namespace

MinimizeReport minimize_bfgs(const ObjectiveWithGradient& objective, const RealVector& x0,
                             double gtol, int max_iterations) {
  const Eigen::Index n = x0.size();
  MinimizeReport rep;
  rep.x = x0;
  rep.gradient = RealVector::Zero(n);
  rep.value = objective(rep.x, rep.gradient);
  if (n == 0) {
    rep.converged = true;
    return rep;
  }

  RealMatrix hinv = RealMatrix::Identity(n, n);
  bool scaled = false;
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;

  for (int it = 0; it < max_iterations; ++it) {
    if (rep.gradient.cwiseAbs().maxCoeff() <= gtol) {
      rep.converged = true;
      rep.iterations = it;
      return rep;
    }
    RealVector p = -hinv * rep.gradient;
    double slope0 = p.dot(rep.gradient);
    if (slope0 >= 0.0) {
      hinv.setIdentity();
      p = -rep.gradient;
      slope0 = p.dot(rep.gradient);
    }

    auto eval = [&](double alpha) {
      LinePoint pt;
      pt.alpha = alpha;
      pt.x = rep.x + alpha * p;
      pt.g = RealVector::Zero(n);
      pt.f = objective(pt.x, pt.g);
      pt.slope = pt.g.dot(p);
      return pt;
    };

    LinePoint start{0.0, rep.value, slope0, rep.x, rep.gradient};
    LinePoint prev = start;
    double alpha = 1.0;
    std::optional<LinePoint> found;

    auto zoom = [&](LinePoint lo, LinePoint hi) -> std::optional<LinePoint> {
      for (int z = 0; z < 40; ++z) {
        double a = cubic_min(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f, hi.slope);
        const double left = std::min(lo.alpha, hi.alpha);
        const double right = std::max(lo.alpha, hi.alpha);
        const double margin = 0.1 * (right - left);
        if (!(a > left + margin && a < right - margin)) a = 0.5 * (left + right);
        LinePoint mid = eval(a);
        if (!std::isfinite(mid.f) || mid.f > start.f + c1 * a * slope0 || mid.f >= lo.f) {
          hi = std::move(mid);
        } else {
          if (std::abs(mid.slope) <= -c2 * slope0) return mid;
          if (mid.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = std::move(mid);
        }
        if (std::abs(hi.alpha - lo.alpha) < 1e-16) break;
      }
      if (lo.alpha > 0.0 && lo.f < start.f) return lo;
      return std::nullopt;
    };

    for (int ls = 0; ls < 30; ++ls) {
      LinePoint cur = eval(alpha);
      if (!std::isfinite(cur.f) || cur.f > start.f + c1 * alpha * slope0 ||
          (ls > 0 && cur.f >= prev.f)) {
        found = zoom(prev, cur);
        break;
      }
      if (std::abs(cur.slope) <= -c2 * slope0) {
        found = cur;
        break;
      }
      if (cur.slope >= 0.0) {
        found = zoom(cur, prev);
        break;
      }
      prev = cur;
      alpha *= 2.0;
    }

    if (!found) {
      rep.line_search_failed = true;
      rep.iterations = it + 1;
      return rep;
    }

    const RealVector s = found->x - rep.x;
    const RealVector y = found->g - rep.gradient;
    rep.x = found->x;
    rep.value = found->f;
    rep.gradient = found->g;
    rep.iterations = it + 1;

    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const RealVector hy = hinv * y;
      hinv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
              rho * (hy * s.transpose() + s * hy.transpose());
    }
  }
  rep.converged = rep.gradient.cwiseAbs().maxCoeff() <= gtol;
  return rep;
}

}  // namespace vbse
