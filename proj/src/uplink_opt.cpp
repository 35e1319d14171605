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
#include "vflcran/uplink_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vflcran {

namespace {

// Channels and noise in units of the receiver noise: g = h sqrt(P) / sigma_z,
// q' = q / sigma_z^2. sigma2_UL is unchanged by this scaling.
struct Normalized {
  CMat g;
  CMat a;  // g g^H + I
  double sigma2 = 1.0;
  double q_min = kUplinkQMinRelative;
  double q_max = 0.0;
  double bound_nats = 0.0;  // capacity in nats, may be inf
  double weight = 1.0;
};

Normalized Normalize(const UplinkProblem& p) {
  Require(p.channels.rows() > 0 && p.channels.cols() > 0,
          ErrorCode::kInvalidArgument, "empty channel matrix");
  Require(p.p_ul > 0.0, ErrorCode::kInvalidArgument, "uplink power must be positive");
  Require(p.noise_power > 0.0, ErrorCode::kInvalidArgument,
          "noise power must be positive");
  Require(p.capacity_bits > 0.0, ErrorCode::kInvalidArgument,
          "capacity must be positive");
  Require(p.weights.size() == 0 || p.weights.size() == p.channels.cols(),
          ErrorCode::kDimensionMismatch, "one weight per device");
  Normalized n;
  n.sigma2 = p.noise_power;
  n.g = p.channels * std::sqrt(p.p_ul / p.noise_power);
  n.a = n.g * n.g.adjoint();
  n.a.diagonal().array() += 1.0;
  n.q_max = 1e15 * (1.0 + n.a.diagonal().real().maxCoeff());
  n.bound_nats = p.capacity_bits * std::log(2.0);
  if (p.weights.size() > 0) {
    Require((p.weights.array() >= 0.0).all(), ErrorCode::kInvalidArgument,
            "weights must be nonnegative");
    n.weight = p.weights.sum();
  } else {
    n.weight = static_cast<double>(p.channels.cols());
  }
  return n;
}

// log det(A + diag q) - sum log q in nats.
double Rate(const CMat& a, const Vec& q, Vec* grad, Mat* hess) {
  CMat b = a;
  b.diagonal() += q.cast<cplx>();
  Eigen::LLT<CMat> llt(b);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    r += 2.0 * std::log(std::real(llt.matrixLLT()(i, i)));
  }
  r -= q.array().log().sum();
  if (grad != nullptr || hess != nullptr) {
    const CMat inv = llt.solve(CMat::Identity(b.rows(), b.cols()));
    if (grad != nullptr) *grad = inv.diagonal().real() - q.cwiseInverse();
    if (hess != nullptr) {
      *hess = -inv.cwiseAbs2();
      hess->diagonal() += q.cwiseInverse().cwiseAbs2();
    }
  }
  return r;
}

double GainFloor(const CMat& g, const CVec& m) {
  return (g.adjoint() * m).cwiseAbs2().minCoeff();
}

double NormalizedObjective(const Normalized& n, const CVec& m, const Vec& q) {
  const double num = (m.cwiseAbs2().array() * (1.0 + q.array())).sum();
  return n.weight * num / (2.0 * GainFloor(n.g, m));
}

double IsotropicNormalized(const Normalized& n) {
  if (!std::isfinite(n.bound_nats)) return n.q_min;
  Eigen::SelfAdjointEigenSolver<CMat> eig(n.a, Eigen::EigenvaluesOnly);
  const Vec alpha = eig.eigenvalues();
  auto excess = [&](double lam) {
    return ((alpha.array() + lam) / lam).log().sum() - n.bound_nats;
  };
  if (excess(n.q_min) <= 0.0) return n.q_min;
  Require(excess(n.q_max) <= 0.0, ErrorCode::kInfeasible,
          "capacity too small for any admissible uplink quantization");
  double lo = std::log(n.q_min), hi = std::log(n.q_max);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(std::exp(mid)) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(hi);
}

Vec QuantizationStep(const Normalized& n, const CVec& m, const Vec& q_prev) {
  kernel::DiagProgram program;
  program.weights = m.cwiseAbs2();
  program.rate = [&n](const Vec& q, Vec* grad, Mat* hess) {
    return Rate(n.a, q, grad, hess);
  };
  program.rate_bound = n.bound_nats;
  program.q_min = n.q_min;
  program.q_max = n.q_max;

  // Strictly feasible start: scale the previous point up.
  Vec start = q_prev.cwiseMax(2.0 * n.q_min).cwiseMin(0.5 * n.q_max);
  for (int it = 0; it < 200; ++it) {
    const double r = Rate(n.a, start, nullptr, nullptr);
    if (r < n.bound_nats * (1.0 - 1e-9) && r < n.bound_nats - 1e-12) break;
    start *= 1.5;
  }
  Require(start.maxCoeff() < n.q_max && Rate(n.a, start, nullptr, nullptr) < n.bound_nats,
          ErrorCode::kInfeasible, "no strictly feasible uplink quantization");
  const kernel::DiagResult res = kernel::BarrierNewtonDiag(program, start);
  return res.q;
}

CVec AlignPhase(const CVec& v, const CVec& ref) {
  const cplx inner = v.dot(ref);  // v^H ref
  if (std::abs(inner) == 0.0) return v;
  return v * (inner / std::abs(inner));
}

}  // namespace

kernel::MinMaxResult SolveScaSubproblem(const Mat& tangents, const Vec& offsets,
                                        const Mat& ellipsoid) {
  kernel::MinMaxResult res = kernel::SolveEpigraphMinMax(tangents, offsets, ellipsoid);
  Require(res.kkt_residual < 1e-7, ErrorCode::kNumerical,
          "SCA subproblem did not reach the KKT tolerance");
  return res;
}

ScaResult ScaBeamforming(const CMat& g, const Vec& qt, const CVec& m0,
                         double tolerance, int max_iterations) {
  const Eigen::Index n = g.rows();
  const Eigen::Index kc = g.cols();
  Require(qt.size() == n && m0.size() == n, ErrorCode::kDimensionMismatch,
          "SCA dimension mismatch");
  Require((qt.array() > 0.0).all(), ErrorCode::kInvalidArgument,
          "Qt must be positive definite");
  // Real coordinates x = [Re m; Im m]; |m^H g|^2 = (p.x)^2 + (r.x)^2.
  Mat p(2 * n, kc), r(2 * n, kc);
  for (Eigen::Index k = 0; k < kc; ++k) {
    p.col(k) << g.col(k).real(), g.col(k).imag();
    r.col(k) << g.col(k).imag(), -g.col(k).real();
  }
  Vec ediag(2 * n);
  ediag << qt, qt;
  const Mat ellipsoid = ediag.asDiagonal();
  auto level = [&](const Vec& x) { return ediag.dot(x.cwiseAbs2()); };
  auto gains = [&](const Vec& x) {
    return Vec((p.transpose() * x).cwiseAbs2() + (r.transpose() * x).cwiseAbs2());
  };

  ScaResult out;
  Vec x = kernel::RealStack(m0);
  Require(x.squaredNorm() > 0.0, ErrorCode::kInvalidArgument, "zero start point");
  x /= std::sqrt(level(x));
  double f = -gains(x).minCoeff();
  out.trace.push_back(f);
  for (int it = 0; it < max_iterations; ++it) {
    const Vec pd = p.transpose() * x;
    const Vec rd = r.transpose() * x;
    const Mat tangents = -2.0 * (p * pd.asDiagonal() + r * rd.asDiagonal());
    const Vec offsets = pd.cwiseAbs2() + rd.cwiseAbs2();
    const kernel::MinMaxResult sub = SolveScaSubproblem(tangents, offsets, ellipsoid);
    out.kkt_residual = std::max(out.kkt_residual, sub.kkt_residual);
    Vec x_new = sub.x;
    const double lev = level(x_new);
    if (!(lev > 0.0)) break;
    if (lev < 1.0 - 1e-9) out.interior_before_rescale = true;
    x_new /= std::sqrt(lev);
    const double f_new = -gains(x_new).minCoeff();
    ++out.iterations;
    if (f_new > f) break;  // keep the better point
    const double move = (x_new - x).norm();
    x = x_new;
    f = f_new;
    out.trace.push_back(f);
    if (move < tolerance * std::max(1.0, x.norm())) break;
  }
  out.m = kernel::ComplexUnstack(x);
  return out;
}

double IsotropicUplinkNoise(const UplinkProblem& problem) {
  const Normalized n = Normalize(problem);
  return IsotropicNormalized(n) * n.sigma2;
}

Vec OptimizeUplinkQuantization(const CVec& m, const UplinkProblem& problem,
                               const Vec* start) {
  const Normalized n = Normalize(problem);
  Require(m.size() == n.g.rows(), ErrorCode::kDimensionMismatch, "beamformer length");
  if (!std::isfinite(n.bound_nats)) {
    return Vec::Constant(m.size(), n.q_min * n.sigma2);
  }
  Vec q0 = start != nullptr ? Vec(*start / n.sigma2)
                            : Vec::Constant(m.size(), IsotropicNormalized(n));
  Require(q0.size() == m.size(), ErrorCode::kDimensionMismatch, "start length");
  return QuantizationStep(n, m, q0) * n.sigma2;
}

double UplinkObjective(const UplinkProblem& problem, const CVec& m, const Vec& q) {
  const Normalized n = Normalize(problem);
  return NormalizedObjective(n, m, q / n.sigma2);
}

UplinkDesign MakeUplinkDesign(const UplinkProblem& problem, const CVec& m,
                              const Vec& q) {
  UplinkDesign d;
  d.m = m;
  d.q = q;
  const ZeroForcing zf = ZeroForcingUplink(m, problem.channels, problem.p_ul);
  d.eta = zf.eta;
  d.b = zf.b;
  return d;
}

UplinkResult OptimizeUplink(const UplinkProblem& problem,
                            const UplinkOptions& options,
                            const UplinkStart* start) {
  const Normalized n = Normalize(problem);
  const Eigen::Index dim = n.g.rows();
  const bool finite = std::isfinite(n.bound_nats);

  CVec m;
  Vec q;
  if (start != nullptr) {
    Require(start->m.size() == dim && start->q.size() == dim,
            ErrorCode::kDimensionMismatch, "start point length");
    m = start->m;
    q = (start->q / n.sigma2).cwiseMax(n.q_min).cwiseMin(n.q_max);
    Require(!finite || Rate(n.a, q, nullptr, nullptr) <= n.bound_nats * (1.0 + 1e-12),
            ErrorCode::kInfeasible, "start point violates the capacity");
  } else {
    q = Vec::Constant(dim, IsotropicNormalized(n));
    const Vec inv = (1.0 + q.array()).inverse();
    Eigen::Index weakest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n.g.cols(); ++k) {
      const double v = n.g.col(k).cwiseAbs2().dot(inv);
      if (v < best) {
        best = v;
        weakest = k;
      }
    }
    const CMat rank_one = n.g.col(weakest) * n.g.col(weakest).adjoint();
    const CMat qt = (1.0 + q.array()).matrix().cast<cplx>().asDiagonal();
    m = kernel::GeneralizedMaxEigvec(rank_one, qt);
  }

  UplinkResult out;
  double obj = NormalizedObjective(n, m, q);
  out.trace.push_back(obj);
  for (int it = 0; it < options.max_outer; ++it) {
    CVec m_new = m;
    if (options.update_beamformer) {
      const Vec qt = (1.0 + q.array()).matrix();
      const ScaResult sca =
          ScaBeamforming(n.g, qt, m, options.tolerance, options.max_inner);
      if (sca.interior_before_rescale) ++out.interior_relaxations;
      m_new = sca.m;
    }
    const Vec q_new =
        finite && options.update_quantization ? QuantizationStep(n, m_new, q) : q;
    const double obj_new = NormalizedObjective(n, m_new, q_new);
    ++out.outer_iterations;
    if (!(obj_new <= obj)) break;  // keep the better iterate
    const double move =
        (m_new / m_new.norm() - AlignPhase(m / m.norm(), m_new)).norm() +
        (q_new - q).norm() / q.norm();
    m = m_new;
    q = q_new;
    obj = obj_new;
    out.trace.push_back(obj);
    if (move < options.tolerance) break;
  }

  const Vec q_watts = q * n.sigma2;
  out.design = MakeUplinkDesign(problem, m, q_watts);
  out.sigma2_ul =
      UplinkNoiseVariance(out.design.m, out.design.eta, q_watts, problem.noise_power);
  out.objective = n.weight * out.sigma2_ul;
  out.capacity_bits =
      UplinkCapacityBits(problem.channels, problem.p_ul, q_watts, problem.noise_power);
  return out;
}

}  // namespace vflcran
