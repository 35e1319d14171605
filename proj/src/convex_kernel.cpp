/*
 * Copyright 2026 The vflcran Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "vflcran/convex_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace vflcran::kernel {

namespace {

template <typename MatrixT>
double LogDetImpl(const MatrixT& a) {
  Require(a.rows() == a.cols() && a.rows() > 0, ErrorCode::kDimensionMismatch,
          "log-det needs a non-empty square matrix");
  Eigen::LLT<MatrixT> llt(a);
  Require(llt.info() == Eigen::Success, ErrorCode::kDegenerate,
          "matrix is not positive definite");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double d = std::real(llt.matrixLLT()(i, i));
    Require(d > 0.0 && std::isfinite(d), ErrorCode::kDegenerate,
            "matrix is not positive definite");
    sum += std::log(d);
  }
  return 2.0 * sum;
}

}  // namespace

double PdLogDet(const Mat& a) { return LogDetImpl(a); }
double PdLogDet(const CMat& a) { return LogDetImpl(a); }

CVec GeneralizedMaxEigvec(const CMat& a, const CMat& b) {
  Require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          ErrorCode::kDimensionMismatch, "generalized eigenproblem shapes");
  Eigen::LLT<CMat> llt(b);
  Require(llt.info() == Eigen::Success, ErrorCode::kDegenerate,
          "B is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> solver(
      a, b, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  Require(solver.info() == Eigen::Success, ErrorCode::kNumerical,
          "generalized eigensolver failed");
  CVec v = solver.eigenvectors().col(a.rows() - 1);
  const double norm2 = std::real(v.dot(b * v));
  return v / std::sqrt(norm2);
}

Mat RealEmbedding(const CMat& a) {
  const Eigen::Index r = a.rows(), c = a.cols();
  Mat out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = a.real();
  out.topRightCorner(r, c) = -a.imag();
  out.bottomLeftCorner(r, c) = a.imag();
  out.bottomRightCorner(r, c) = a.real();
  return out;
}

Vec RealStack(const CVec& v) {
  Vec out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

CVec ComplexUnstack(const Vec& x) {
  Require(x.size() % 2 == 0, ErrorCode::kDimensionMismatch,
          "stacked vector has odd length");
  const Eigen::Index n = x.size() / 2;
  CVec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = cplx(x(i), x(n + i));
  return out;
}

// ---------------------------------------------------------------------------
// Epigraph min-max over an ellipsoid.

MinMaxResult SolveEpigraphMinMax(const Mat& tangents, const Vec& offsets,
                                 const Mat& ellipsoid,
                                 const MinMaxOptions& options) {
  const Eigen::Index n = tangents.rows();
  const Eigen::Index kc = tangents.cols();
  Require(kc > 0 && offsets.size() == kc, ErrorCode::kDimensionMismatch,
          "tangent/offset count mismatch");
  Require(ellipsoid.rows() == n && ellipsoid.cols() == n,
          ErrorCode::kDimensionMismatch, "ellipsoid shape mismatch");
  Eigen::LLT<Mat> llt(ellipsoid);
  Require(llt.info() == Eigen::Success, ErrorCode::kDegenerate,
          "ellipsoid matrix is not positive definite");

  // Whiten: x = L^{-T} y turns the ellipsoid into the unit ball.
  Mat b = llt.matrixL().solve(tangents);
  Vec c = offsets;
  double scale = std::max(b.colwise().norm().maxCoeff(), c.cwiseAbs().maxCoeff());
  MinMaxResult result;
  if (!(scale > 0.0)) {
    result.x = Vec::Zero(n);
    result.value = offsets.maxCoeff();
    return result;
  }
  b /= scale;
  c /= scale;

  Vec y = Vec::Zero(n);
  double t = c.maxCoeff() + 1.0;
  const auto m = static_cast<double>(kc + 1);
  double tau = 1.0;
  Vec s(kc);
  auto slacks = [&](const Vec& yy, double tt, Vec* out) {
    *out = Vec::Constant(kc, tt) - b.transpose() * yy - c;
  };

  Mat h(n + 1, n + 1);
  Vec grad(n + 1);
  int steps = 0;
  while (true) {
    for (int inner = 0; inner < 100 && steps < options.max_newton; ++inner) {
      slacks(y, t, &s);
      const double r = 1.0 - y.squaredNorm();
      const Vec inv_s = s.cwiseInverse();
      const Vec inv_s2 = inv_s.cwiseAbs2();
      grad.head(n) = b * inv_s + (2.0 / r) * y;
      grad(n) = tau - inv_s.sum();
      h.topLeftCorner(n, n) = b * inv_s2.asDiagonal() * b.transpose();
      h.topLeftCorner(n, n).diagonal().array() += 2.0 / r;
      h.topLeftCorner(n, n) += (4.0 / (r * r)) * y * y.transpose();
      h.topRightCorner(n, 1) = -b * inv_s2;
      h.bottomLeftCorner(1, n) = h.topRightCorner(n, 1).transpose();
      h(n, n) = inv_s2.sum();
      Eigen::LDLT<Mat> ldlt(h);
      Vec step = ldlt.solve(-grad);
      const double decrement = -grad.dot(step);
      ++steps;
      if (!(decrement > 1e-14)) break;

      double alpha = 1.0;
      bool moved = false;
      Vec s_new(kc);
      for (int ls = 0; ls < 80; ++ls) {
        const Vec y_new = y + alpha * step.head(n);
        const double t_new = t + alpha * step(n);
        slacks(y_new, t_new, &s_new);
        const double r_new = 1.0 - y_new.squaredNorm();
        if (s_new.minCoeff() > 0.0 && r_new > 0.0) {
          // Barrier change computed as a difference to avoid cancellation.
          const double delta = tau * (t_new - t) -
                               (s_new.array() / s.array()).log().sum() -
                               std::log(r_new / r);
          if (delta <= 0.25 * alpha * -decrement || decrement < 1e-10) {
            y = y_new;
            t = t_new;
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved || decrement < 1e-9) break;
    }
    if (m / tau < options.gap_tolerance || steps >= options.max_newton) break;
    tau *= 10.0;
  }

  // Certificate: lambda from the central path, normalized onto the simplex,
  // is dual feasible with dual value c^T lambda - |B lambda|. The residual is
  // the duality gap plus any ball violation, on the normalized scale.
  slacks(y, t, &s);
  Vec lambda = s.cwiseInverse();
  lambda /= lambda.sum();
  const double dual = c.dot(lambda) - (b * lambda).norm();
  const double primal = (b.transpose() * y + c).maxCoeff();
  result.kkt_residual =
      std::max(primal - dual, 0.0) + std::max(y.squaredNorm() - 1.0, 0.0);
  result.newton_steps = steps;
  result.x = llt.matrixU().solve(y);
  result.value = (tangents.transpose() * result.x + offsets).maxCoeff();
  return result;
}

// ---------------------------------------------------------------------------
// Barrier Newton on diagonal covariances.

bool DiagFeasible(const DiagProgram& program, const Vec& q, double slack) {
  if (q.minCoeff() < program.q_min || q.maxCoeff() > program.q_max) return false;
  if (std::isfinite(program.power_budget) &&
      q.sum() > program.power_budget * (1.0 + 1e-15)) {
    return false;
  }
  const double r = program.rate(q, nullptr, nullptr);
  return std::isfinite(r) && r <= program.rate_bound + slack;
}

namespace {

struct BarrierState {
  double rate_slack = 0.0;
  double power_slack = 0.0;
  bool ok = false;
};

class DiagBarrier {
 public:
  DiagBarrier(const DiagProgram& p, Vec weights)
      : p_(p),
        w_(std::move(weights)),
        has_power_(std::isfinite(p.power_budget)),
        has_lo_(p.q_min > 0.0),
        has_hi_(std::isfinite(p.q_max)),
        xlo_(has_lo_ ? std::log(p.q_min) : 0.0),
        xhi_(has_hi_ ? std::log(p.q_max) : 0.0) {}

  int terms(Eigen::Index n) const {
    return 1 + (has_power_ ? 1 : 0) + static_cast<int>(n) * ((has_lo_ ? 1 : 0) + (has_hi_ ? 1 : 0));
  }

  bool Strict(const Vec& x, double* rate_slack, double* power_slack) const {
    if (has_lo_ && (x.array() <= xlo_).any()) return false;
    if (has_hi_ && (x.array() >= xhi_).any()) return false;
    const Vec q = x.array().exp();
    *power_slack = has_power_ ? p_.power_budget - q.sum() : 1.0;
    if (!(*power_slack > 0.0)) return false;
    const double r = p_.rate(q, nullptr, nullptr);
    *rate_slack = p_.rate_bound - r;
    return std::isfinite(r) && *rate_slack > 0.0;
  }

  // Barrier value relative to a reference point (both strictly feasible).
  double Delta(double tau, const Vec& x_new, double rs_new, double ps_new,
               const Vec& x_old, double rs_old, double ps_old) const {
    const Vec q_new = x_new.array().exp();
    const Vec q_old = x_old.array().exp();
    double d = tau * w_.dot(q_new - q_old) - std::log(rs_new / rs_old);
    if (has_power_) d -= std::log(ps_new / ps_old);
    if (has_lo_) {
      d -= ((x_new.array() - xlo_) / (x_old.array() - xlo_)).log().sum();
    }
    if (has_hi_) {
      d -= ((xhi_ - x_new.array()) / (xhi_ - x_old.array())).log().sum();
    }
    return d;
  }

  void GradHess(double tau, const Vec& x, double rate_slack, double power_slack,
                Vec* grad, Mat* hess) const {
    const Eigen::Index n = x.size();
    const Vec q = x.array().exp();
    Vec gq;
    Mat hq;
    p_.rate(q, &gq, &hq);
    const Vec gx = q.cwiseProduct(gq);
    Mat hx = q.asDiagonal() * hq * q.asDiagonal();
    hx.diagonal() += gx;

    *grad = tau * w_.cwiseProduct(q) + gx / rate_slack;
    *hess = hx / rate_slack + gx * gx.transpose() / (rate_slack * rate_slack);
    hess->diagonal() += tau * w_.cwiseProduct(q);
    if (has_power_) {
      *grad += q / power_slack;
      hess->diagonal() += q / power_slack;
      *hess += q * q.transpose() / (power_slack * power_slack);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (has_lo_) {
        const double d = x(j) - xlo_;
        (*grad)(j) -= 1.0 / d;
        (*hess)(j, j) += 1.0 / (d * d);
      }
      if (has_hi_) {
        const double d = xhi_ - x(j);
        (*grad)(j) += 1.0 / d;
        (*hess)(j, j) += 1.0 / (d * d);
      }
    }
  }

 private:
  const DiagProgram& p_;
  Vec w_;
  bool has_power_, has_lo_, has_hi_;
  double xlo_, xhi_;
};

// Modified Newton direction: shift the Hessian until it factors as PD.
Vec NewtonDirection(const Mat& hess, const Vec& grad) {
  Eigen::LLT<Mat> llt(hess);
  if (llt.info() == Eigen::Success) return llt.solve(-grad);
  double shift = 1e-8 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
  for (int i = 0; i < 40; ++i) {
    Mat shifted = hess;
    shifted.diagonal().array() += shift;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt.solve(-grad);
    shift *= 10.0;
  }
  return -grad;
}

}  // namespace

DiagResult BarrierNewtonDiag(const DiagProgram& program, const Vec& q_start,
                             const BarrierOptions& options) {
  const Eigen::Index n = q_start.size();
  Require(program.weights.size() == n, ErrorCode::kDimensionMismatch,
          "weights and start differ in length");
  Require((program.weights.array() >= 0.0).all(), ErrorCode::kInvalidArgument,
          "objective weights must be nonnegative");
  Require(static_cast<bool>(program.rate), ErrorCode::kInvalidArgument,
          "rate function missing");

  DiagResult result;
  const double w0 = program.weights.dot(q_start);
  Vec x = q_start.array().log();
  double rate_slack = 0.0, power_slack = 0.0;

  if (w0 > 0.0) {
    DiagBarrier barrier(program, program.weights / w0);
    Require(barrier.Strict(x, &rate_slack, &power_slack), ErrorCode::kInfeasible,
            "barrier start is not strictly feasible");
    const double m = barrier.terms(n);
    double tau = 1.0;
    Vec grad;
    Mat hess;
    while (true) {
      for (int inner = 0; inner < 100 && result.newton_steps < options.max_newton;
           ++inner) {
        barrier.GradHess(tau, x, rate_slack, power_slack, &grad, &hess);
        const Vec step = NewtonDirection(hess, grad);
        const double slope = grad.dot(step);
        ++result.newton_steps;
        if (!(slope < -1e-14)) break;
        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
          const Vec x_new = x + alpha * step;
          double rs = 0.0, ps = 0.0;
          if (barrier.Strict(x_new, &rs, &ps)) {
            const double d = barrier.Delta(tau, x_new, rs, ps, x, rate_slack, power_slack);
            if (d <= 0.25 * alpha * slope) {
              x = x_new;
              rate_slack = rs;
              power_slack = ps;
              result.barrier_trace.push_back(d);
              moved = true;
              break;
            }
          }
          alpha *= 0.5;
        }
        if (!moved || -slope < 1e-12) break;
      }
      if (m / tau < options.gap_tolerance ||
          result.newton_steps >= options.max_newton) {
        break;
      }
      tau *= 20.0;
    }
  } else {
    Require(DiagFeasible(program, q_start), ErrorCode::kInfeasible,
            "start is not feasible");
  }

  Vec q = x.array().exp();
  q = q.cwiseMax(program.q_min).cwiseMin(program.q_max);

  // Zero-weight coordinates carry no cost: raise them as far as feasible.
  for (Eigen::Index j = 0; j < n; ++j) {
    if (program.weights(j) > 0.0 || !std::isfinite(program.q_max)) continue;
    Vec trial = q;
    trial(j) = program.q_max;
    if (DiagFeasible(program, trial)) {
      q = trial;
      continue;
    }
    double lo = std::log(q(j)), hi = std::log(program.q_max);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      trial(j) = std::exp(mid);
      if (DiagFeasible(program, trial)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    q(j) = std::exp(lo);
  }

  // Weighted coordinates: shrink along the ray until the rate constraint is
  // active (or the lower bound is reached).
  const auto weighted = (program.weights.array() > 0.0).cast<double>().matrix();
  if (weighted.sum() > 0.0 && DiagFeasible(program, q)) {
    double t_floor = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (weighted(j) > 0.0) t_floor = std::max(t_floor, program.q_min / q(j));
    }
    auto at = [&](double t) {
      Vec out = q;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (weighted(j) > 0.0) out(j) *= t;
      }
      return out;
    };
    if (t_floor > 0.0 && DiagFeasible(program, at(t_floor))) {
      q = at(t_floor);
    } else {
      double lo = std::log(std::max(t_floor, 1e-300)), hi = 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (DiagFeasible(program, at(std::exp(mid)))) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      q = at(std::exp(hi));
    }
  }

  result.q = q;
  result.objective = program.weights.dot(q);
  result.rate = program.rate(q, nullptr, nullptr);
  return result;
}

// ---------------------------------------------------------------------------
// Projected gradient.

Vec ProjectOntoBall(const Vec& x, double radius) {
  Require(radius >= 0.0, ErrorCode::kInvalidArgument, "negative ball radius");
  const double nrm = x.norm();
  return nrm <= radius ? x : Vec(x * (radius / nrm));
}

GradientResult ProjectedGradient(const SmoothFn& objective,
                                 const Projector& project, const Vec& x0,
                                 const GradientOptions& options) {
  GradientResult result;
  Vec x = project(x0);
  Vec g;
  double f = objective(x, &g);
  Require(std::isfinite(f) && g.allFinite(), ErrorCode::kNumerical,
          "objective is not finite at the start point");
  result.trace.push_back(f);
  const double gnorm = g.norm();
  double step = gnorm > 0.0 ? std::max(x.norm(), 1.0) / gnorm : 1.0;

  for (int it = 0; it < options.max_iterations; ++it) {
    Vec x_new, g_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = project(x - step * g);
      const double move2 = (x_new - x).squaredNorm();
      if (move2 == 0.0) break;
      f_new = objective(x_new, &g_new);
      if (!std::isfinite(f_new)) {
        Require(ls + 1 < 60, ErrorCode::kNumerical, "objective returned non-finite");
      } else if (f_new <= f - 1e-4 / step * move2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    result.iterations = it + 1;
    if (!accepted) {
      result.converged = true;
      break;
    }
    const Vec sx = x_new - x;
    const Vec sy = g_new - g;
    const double move = sx.norm();
    const double decrease = f - f_new;
    x = x_new;
    g = g_new;
    f = f_new;
    result.trace.push_back(f);
    const double curvature = sx.dot(sy);
    step = curvature > 0.0 ? sx.squaredNorm() / curvature : 2.0 * step;
    if (move <= options.tolerance * std::max(1.0, x.norm()) ||
        decrease <= 1e-15 * std::abs(f)) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.value = f;
  return result;
}

// ---------------------------------------------------------------------------
// Projection onto axis-aligned ellipsoids.

namespace {

double Weighted(const Vec& x, const Vec& w) { return w.dot(x.cwiseAbs2()); }

Vec ProjectSingle(const Vec& v, const Vec& a) {
  if (Weighted(v, a) <= 1.0) return v;
  const Vec c = v.cwiseAbs2();
  double alpha = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Vec den = (1.0 + alpha * a.array()).matrix();
    const double g = (a.array() * c.array() / den.array().square()).sum() - 1.0;
    const double dg =
        -2.0 * (a.array().square() * c.array() / den.array().cube()).sum();
    if (std::abs(g) < 1e-15 || dg == 0.0) break;
    const double next = alpha - g / dg;
    if (next == alpha) break;
    alpha = next;
  }
  Vec x = v.array() / (1.0 + alpha * a.array());
  const double lev = Weighted(x, a);
  if (lev > 1.0) x /= std::sqrt(lev);
  return x;
}

}  // namespace

Vec ProjectOntoDiagEllipsoids(const Vec& v, const Vec& a, const Vec& b) {
  Require(a.size() == v.size() && (b.size() == 0 || b.size() == v.size()),
          ErrorCode::kDimensionMismatch, "ellipsoid weights length");
  const bool two = b.size() > 0;
  if (Weighted(v, a) <= 1.0 && (!two || Weighted(v, b) <= 1.0)) return v;
  const Vec xa = ProjectSingle(v, a);
  if (!two || Weighted(xa, b) <= 1.0) return xa;
  const Vec xb = ProjectSingle(v, b);
  if (Weighted(xb, a) <= 1.0) return xb;

  // Both constraints active: Newton ascent on the concave 2-D dual
  //   D(al, be) = sum c_j (al a_j + be b_j) / (1 + al a_j + be b_j) - al - be.
  const Vec c = v.cwiseAbs2();
  auto dual = [&](double al, double be) {
    const Eigen::ArrayXd z = al * a.array() + be * b.array();
    return (c.array() * z / (1.0 + z)).sum() - al - be;
  };
  double al = 0.0, be = 0.0;
  {
    // Start from the single-constraint multipliers, halved.
    const double ra = std::sqrt(Weighted(v, a));
    const double rb = std::sqrt(Weighted(v, b));
    al = 0.5 * std::max(ra - 1.0, 0.0) / std::max(a.maxCoeff(), 1e-300);
    be = 0.5 * std::max(rb - 1.0, 0.0) / std::max(b.maxCoeff(), 1e-300);
  }
  for (int it = 0; it < 200; ++it) {
    const Eigen::ArrayXd den = 1.0 + al * a.array() + be * b.array();
    const Eigen::ArrayXd d2 = den.square(), d3 = den.cube();
    const double ga = (a.array() * c.array() / d2).sum() - 1.0;
    const double gb = (b.array() * c.array() / d2).sum() - 1.0;
    if (std::abs(ga) < 1e-14 && std::abs(gb) < 1e-14) break;
    const double haa = -2.0 * (a.array().square() * c.array() / d3).sum();
    const double hbb = -2.0 * (b.array().square() * c.array() / d3).sum();
    const double hab = -2.0 * (a.array() * b.array() * c.array() / d3).sum();
    Eigen::Matrix2d hm;
    hm << haa, hab, hab, hbb;
    Eigen::Vector2d grad(ga, gb);
    Eigen::Vector2d dir = hm.ldlt().solve(-grad);
    if (!dir.allFinite() || grad.dot(dir) <= 0.0) dir = grad;
    const double base = dual(al, be);
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const double na = std::max(al + step * dir(0), 0.0);
      const double nb = std::max(be + step * dir(1), 0.0);
      if (dual(na, nb) >= base - 1e-16 * std::abs(base)) {
        moved = (na != al || nb != be);
        al = na;
        be = nb;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  Vec x = v.array() / (1.0 + al * a.array() + be * b.array());
  const double lev = std::max(Weighted(x, a), Weighted(x, b));
  if (lev > 1.0) x /= std::sqrt(lev);
  return x;
}

}  // namespace vflcran::kernel
