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
#include "vflcran/downlink_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vflcran/convex_kernel.hpp"

namespace vflcran {

namespace {

// g = h sqrt(P) / sigma_z, u' = u / sqrt(P), q' = q / P. The power budget
// becomes 1 and sigma2_DL,k = (1 + g^H Q' g) / (2 |g^H u'|^2).
struct Normalized {
  CMat g;
  Mat g2;  // |g_kj|^2, NM x K
  Vec weight;
  double p = 1.0;
  double capacity_bits = 0.0;
  double q_min = 0.0;
  bool finite = true;
};

Normalized Normalize(const DownlinkProblem& p) {
  Require(p.channels.rows() > 0 && p.channels.cols() > 0,
          ErrorCode::kInvalidArgument, "empty channel matrix");
  Require(p.p_dl > 0.0, ErrorCode::kInvalidArgument, "downlink power must be positive");
  Require(p.noise_power > 0.0, ErrorCode::kInvalidArgument,
          "noise power must be positive");
  Require(p.capacity_bits > 0.0, ErrorCode::kInvalidArgument,
          "capacity must be positive");
  Require(p.weights.size() == 0 || p.weights.size() == p.channels.cols(),
          ErrorCode::kDimensionMismatch, "one weight per device");
  Normalized n;
  n.p = p.p_dl;
  n.g = p.channels * std::sqrt(p.p_dl / p.noise_power);
  n.g2 = n.g.cwiseAbs2();
  n.weight = p.weights.size() > 0 ? p.weights : Vec::Ones(p.channels.cols());
  Require((n.weight.array() >= 0.0).all(), ErrorCode::kInvalidArgument,
          "weights must be nonnegative");
  n.capacity_bits = p.capacity_bits;
  n.finite = std::isfinite(p.capacity_bits);
  const double top = n.g2.colwise().sum().maxCoeff();
  Require(top > 0.0, ErrorCode::kDegenerate, "all downlink channels are zero");
  n.q_min = 1e-12 / top;
  return n;
}

double Objective(const Normalized& n, const CVec& u, const Vec& q) {
  const Vec gain = (n.g.adjoint() * u).cwiseAbs2();
  const Vec num = (1.0 + (n.g2.transpose() * q).array()).matrix();
  return 0.5 * (n.weight.array() * num.array() / gain.array()).sum();
}

double CapacityRatio(const Normalized& n) {
  return n.finite ? std::exp2(n.capacity_bits) - 1.0
                  : std::numeric_limits<double>::infinity();
}

double Isotropic(const Normalized& n, const CVec& u) {
  if (!n.finite) return n.q_min;
  return std::max(u.squaredNorm() / CapacityRatio(n), n.q_min);
}

DownlinkStart InitialNormalized(const Normalized& n) {
  const Eigen::Index dim = n.g.rows();
  CVec dir = CVec::Zero(dim);
  for (Eigen::Index k = 0; k < n.g.cols(); ++k) {
    const double nk = n.g.col(k).norm();
    if (nk > 0.0) dir += n.g.col(k) / nk;
  }
  if (dir.norm() == 0.0) dir = n.g.col(0);
  double power_u = 0.5;
  if (n.finite) {
    power_u = std::min(0.5, 1.0 / (1.0 + static_cast<double>(dim) / CapacityRatio(n)));
  }
  DownlinkStart s;
  s.u = dir * std::sqrt(power_u) / dir.norm();
  s.q = Vec::Constant(dim, Isotropic(n, s.u));
  const double total = s.u.squaredNorm() + s.q.sum();
  if (total > 1.0) {
    // Only reachable when q sits at its floor; shrink u.
    s.u *= std::sqrt(std::max(1.0 - s.q.sum(), 0.0) / s.u.squaredNorm());
  }
  return s;
}

// Sigma = v v^H + diag(w) is kept in factored form; at high capacity w is
// many orders of magnitude below |v|^2 and a dense factorization fails.
Vec QStep(const Normalized& n, const CVec& u, const CVec& v, const Vec& w,
          const Vec& q_prev) {
  const Eigen::Index dim = u.size();
  const double budget = 1.0 - u.squaredNorm();
  if (!(budget > 0.0)) return q_prev;
  Require((w.array() > 0.0).all(), ErrorCode::kDegenerate,
          "Sigma is not positive definite");
  // Sherman-Morrison: Sigma^{-1} = W^{-1} - W^{-1} v v^H W^{-1} / (1 + gamma).
  const Vec share = v.cwiseAbs2().cwiseQuotient(w);  // |v_j|^2 / w_j
  const double gamma = share.sum();
  // Sums over i != j are formed directly; gamma - share_j cancels badly when
  // one coordinate dominates.
  Vec s(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    double rest = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i != j) rest += share(i);
    }
    s(j) = (1.0 + rest) / ((1.0 + gamma) * w(j));
  }
  double quad = gamma / (1.0 + gamma);  // u^H Sigma^{-1} u when u = v
  if ((u - v).norm() != 0.0) {
    const CVec winv_u = u.cwiseQuotient(w.cast<cplx>());
    quad = std::real(u.dot(winv_u)) - std::norm(v.dot(winv_u)) / (1.0 + gamma);
  }
  const double constant = w.array().log().sum() + std::log1p(gamma) + quad -
                          static_cast<double>(dim);
  const double bound = n.capacity_bits * std::log(2.0);
  auto rate = [s, constant](const Vec& q, Vec* grad, Mat* hess) {
    if ((q.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
    if (grad != nullptr) *grad = s - q.cwiseInverse();
    if (hess != nullptr) *hess = q.cwiseInverse().cwiseAbs2().asDiagonal();
    return s.dot(q) - q.array().log().sum() + constant;
  };

  // Phase-1 point: minimizer of the surrogate rate plus a power price nu.
  auto phase1 = [&](double nu) { return Vec((s.array() + nu).inverse()); };
  const double target = 0.99 * budget;
  double nu = 0.0;
  if (phase1(0.0).sum() > target) {
    double lo = 0.0, hi = 1.0;
    while (phase1(hi).sum() > target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phase1(mid).sum() > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    nu = hi;
  }
  const Vec p1 = phase1(nu).cwiseMax(2.0 * n.q_min);

  kernel::DiagProgram program;
  program.weights = Vec::Zero(dim);
  const Vec gain = (n.g.adjoint() * u).cwiseAbs2();
  for (Eigen::Index k = 0; k < n.g.cols(); ++k) {
    program.weights += (0.5 * n.weight(k) / gain(k)) * n.g2.col(k);
  }
  program.rate = rate;
  program.rate_bound = bound;
  program.power_budget = budget;
  program.q_min = n.q_min;
  program.q_max = 1.0;

  auto strictly = [&](const Vec& q) {
    return (q.array() > n.q_min).all() && (q.array() < 1.0).all() &&
           q.sum() < budget && rate(q, nullptr, nullptr) < bound;
  };
  if (!strictly(p1)) return q_prev;
  Vec start = p1;
  for (double theta : {0.01, 0.1, 0.5}) {
    const Vec trial = (1.0 - theta) * q_prev + theta * p1;
    if (strictly(trial)) {
      start = trial;
      break;
    }
  }
  const kernel::DiagResult res = kernel::BarrierNewtonDiag(program, start);
  return res.q;
}

CVec UStep(const Normalized& n, const Vec& q, const CVec& u0) {
  const Eigen::Index dim = u0.size();
  const double budget = 1.0 - q.sum();
  Require(budget > 0.0, ErrorCode::kInfeasible, "no power left for the beamformer");
  const Vec c = 0.5 * n.weight.cwiseProduct(
                          (1.0 + (n.g2.transpose() * q).array()).matrix());
  const CMat& g = n.g;
  auto objective = [&](const Vec& x, Vec* grad) {
    const CVec u = kernel::ComplexUnstack(x);
    const CVec proj = g.adjoint() * u;  // g_k^H u
    const Vec gain = proj.cwiseAbs2();
    if ((gain.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
    const double value = (c.array() / gain.array()).sum();
    if (grad != nullptr) {
      // d/dx of c / |g^H u|^2 is -2 c Re-stack(g g^H u) / |g^H u|^4
      const Vec coef = -2.0 * c.array() / gain.array().square();
      const CVec wirt = g * (coef.cast<cplx>().asDiagonal() * proj);
      *grad = kernel::RealStack(wirt);
    }
    return value;
  };
  const Vec a = Vec::Constant(2 * dim, 1.0 / budget);
  Vec b;
  if (n.finite) {
    const Vec bq = (q.array() * CapacityRatio(n)).inverse();
    b.resize(2 * dim);
    b << bq, bq;
  }
  auto project = [&a, &b](const Vec& x) {
    return kernel::ProjectOntoDiagEllipsoids(x, a, b);
  };
  kernel::GradientOptions opts;
  opts.tolerance = 1e-9;
  opts.max_iterations = 300;
  const kernel::GradientResult res =
      kernel::ProjectedGradient(objective, project, kernel::RealStack(u0), opts);
  return kernel::ComplexUnstack(res.x);
}

double Movement(const CVec& u_new, const CVec& u, const Vec& q_new, const Vec& q) {
  return (u_new - u).norm() / std::max(u.norm(), 1e-300) +
         (q_new - q).norm() / std::max(q.norm(), 1e-300);
}

}  // namespace

double LogdetMajorant(const CMat& omega, const CMat& sigma) {
  Require(omega.rows() == sigma.rows() && omega.cols() == sigma.cols(),
          ErrorCode::kDimensionMismatch, "majorant shapes differ");
  Eigen::LLT<CMat> lo(omega);
  Require(lo.info() == Eigen::Success, ErrorCode::kDegenerate,
          "Omega is not positive definite");
  Eigen::LLT<CMat> ls(sigma);
  Require(ls.info() == Eigen::Success, ErrorCode::kDegenerate,
          "Sigma is not positive definite");
  const double trace = std::real(ls.solve(omega).trace());
  return kernel::PdLogDet(sigma) + trace - static_cast<double>(sigma.rows());
}

CMat SigmaUpdate(const CVec& u, const Vec& q) {
  Require(u.size() == q.size(), ErrorCode::kDimensionMismatch, "u and Q sizes");
  CMat s = u * u.adjoint();
  s.diagonal() += q.cast<cplx>();
  return s;
}

double DownlinkQMin(const DownlinkProblem& problem) {
  const Normalized n = Normalize(problem);
  return n.q_min * n.p;
}

double IsotropicDownlinkNoise(const DownlinkProblem& problem, const CVec& u) {
  const Normalized n = Normalize(problem);
  return Isotropic(n, u / std::sqrt(n.p)) * n.p;
}

DownlinkStart DownlinkInitialPoint(const DownlinkProblem& problem) {
  const Normalized n = Normalize(problem);
  DownlinkStart s = InitialNormalized(n);
  s.u *= std::sqrt(n.p);
  s.q *= n.p;
  return s;
}

double DownlinkObjective(const DownlinkProblem& problem, const CVec& u,
                         const Vec& q) {
  const Normalized n = Normalize(problem);
  return Objective(n, u / std::sqrt(n.p), q / n.p);
}

DownlinkDesign MakeDownlinkDesign(const DownlinkProblem& problem, const CVec& u,
                                  const Vec& q) {
  DownlinkDesign d;
  d.u = u;
  d.q = q;
  d.b = DownlinkReceiveScalars(u, problem.channels);
  return d;
}

Vec SolveDownlinkQ(const DownlinkProblem& problem, const CVec& u,
                   const CVec& sigma_u, const Vec& sigma_q, const Vec& q_prev) {
  const Normalized n = Normalize(problem);
  if (!n.finite) return Vec::Constant(u.size(), n.q_min * n.p);
  const double root = std::sqrt(n.p);
  return QStep(n, u / root, sigma_u / root, sigma_q / n.p, q_prev / n.p) * n.p;
}

CVec SolveDownlinkU(const DownlinkProblem& problem, const Vec& q,
                    const CVec& u0) {
  const Normalized n = Normalize(problem);
  const double root = std::sqrt(n.p);
  return UStep(n, q / n.p, u0 / root) * root;
}

DownlinkResult OptimizeDownlink(const DownlinkProblem& problem,
                                const DownlinkOptions& options,
                                const DownlinkStart* start) {
  const Normalized n = Normalize(problem);
  const Eigen::Index dim = n.g.rows();
  const double root = std::sqrt(n.p);
  CVec u;
  Vec q;
  if (start != nullptr) {
    Require(start->u.size() == dim && start->q.size() == dim,
            ErrorCode::kDimensionMismatch, "start point length");
    u = start->u / root;
    q = (start->q / n.p).cwiseMax(n.q_min);
    Require(u.squaredNorm() + q.sum() <= 1.0 + 1e-12, ErrorCode::kInfeasible,
            "start point exceeds the power budget");
    Require(!n.finite || DownlinkCapacityBits(u, q) <= n.capacity_bits + 1e-9,
            ErrorCode::kInfeasible, "start point violates the capacity");
  } else {
    const DownlinkStart s = InitialNormalized(n);
    u = s.u;
    q = s.q;
  }

  DownlinkResult out;
  double obj = Objective(n, u, q);
  out.initial_objective = obj;
  CVec sigma_u = u;
  Vec sigma_q = q;
  for (int it = 0; it < options.max_iterations; ++it) {
    DownlinkStep step;
    const CVec u_old = u;
    const Vec q_old = q;

    if (n.finite && options.update_quantization) {
      const Vec q_new = QStep(n, u, sigma_u, sigma_q, q);
      const double o = Objective(n, u, q_new);
      step.surrogate_gap_bits = DownlinkCapacityBits(u, q_new) - n.capacity_bits;
      if (o <= obj) {
        q = q_new;
        obj = o;
      }
    }
    step.after_q = obj;

    if (options.update_beamformer) {
      const CVec u_new = UStep(n, q, u);
      const double o = Objective(n, u_new, q);
      if (o <= obj) {
        u = u_new;
        obj = o;
      }
    }
    step.after_u = obj;

    {
      const double total = u.squaredNorm() + q.sum();
      if (total < 1.0) {
        const double scale = 1.0 / total;
        const CVec u_new = u * std::sqrt(scale);
        const Vec q_new = (q * scale).cwiseMin(1.0);
        const double o = Objective(n, u_new, q_new);
        if (o <= obj && u_new.squaredNorm() + q_new.sum() <= 1.0 + 1e-12) {
          u = u_new;
          q = q_new;
          obj = o;
        }
      }
    }
    step.after_rescale = obj;

    sigma_u = u;
    sigma_q = q;
    step.after_sigma = Objective(n, u, q);
    out.steps.push_back(step);
    ++out.iterations;
    if (Movement(u, u_old, q, q_old) < options.tolerance) break;
  }

  const CVec u_w = u * root;
  const Vec q_w = q * n.p;
  out.design = MakeDownlinkDesign(problem, u_w, q_w);
  out.sigma2_dl.resize(n.g.cols());
  for (Eigen::Index k = 0; k < n.g.cols(); ++k) {
    out.sigma2_dl(k) = DownlinkNoiseVariance(out.design.b(k), problem.channels.col(k),
                                             q_w, problem.noise_power);
  }
  out.objective = n.weight.dot(out.sigma2_dl);
  out.capacity_bits = DownlinkCapacityBits(u_w, q_w);
  out.power = DownlinkPower(u_w, q_w);
  return out;
}

}  // namespace vflcran
