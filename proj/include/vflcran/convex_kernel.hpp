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
#ifndef VFLCRAN_CONVEX_KERNEL_HPP_
#define VFLCRAN_CONVEX_KERNEL_HPP_

#include <functional>
#include <limits>
#include <vector>

#include "vflcran/common.hpp"

// Small dense solvers shared by the transceiver optimizers. Problem sizes are
// at most a few hundred variables, so everything is dense and direct.
namespace vflcran::kernel {

// log|A| through a Cholesky factor; throws kDegenerate if A is not PD.
double PdLogDet(const Mat& a);
double PdLogDet(const CMat& a);

// Dominant generalized eigenvector of A v = lambda B v (A Hermitian PSD,
// B Hermitian PD), normalized so that v^H B v = 1.
CVec GeneralizedMaxEigvec(const CMat& a, const CMat& b);

// Real embedding [Re A, -Im A; Im A, Re A] of a complex matrix, and the
// matching [Re v; Im v] stacking for vectors.
Mat RealEmbedding(const CMat& a);
Vec RealStack(const CVec& v);
CVec ComplexUnstack(const Vec& x);

struct MinMaxOptions {
  double gap_tolerance = 1e-10;  // on the normalized problem
  int max_newton = 400;
};

struct MinMaxResult {
  Vec x;
  double value = 0.0;  // max_k a_k^T x + c_k at x
  double kkt_residual = 0.0;
  int newton_steps = 0;
};

// min_x max_k a_k^T x + c_k  s.t.  x^T E x <= 1, with E symmetric PD.
// tangents holds a_k as columns.
MinMaxResult SolveEpigraphMinMax(const Mat& tangents, const Vec& offsets,
                                 const Mat& ellipsoid,
                                 const MinMaxOptions& options = {});

// R(q) with optional gradient and Hessian with respect to q.
using DiagRateFn = std::function<double(const Vec& q, Vec* grad, Mat* hess)>;

// min sum_j w_j q_j  s.t.  R(q) <= rate_bound, q_min <= q_j <= q_max,
// and sum_j q_j <= power_budget when the budget is finite.
struct DiagProgram {
  Vec weights;
  DiagRateFn rate;
  double rate_bound = 0.0;
  double power_budget = std::numeric_limits<double>::infinity();
  double q_min = 0.0;
  double q_max = std::numeric_limits<double>::infinity();
};

struct BarrierOptions {
  double gap_tolerance = 1e-10;
  double boundary_tolerance = 1e-10;  // on R(q) when pushing to the boundary
  int max_newton = 600;
};

struct DiagResult {
  Vec q;
  double objective = 0.0;
  double rate = 0.0;
  int newton_steps = 0;
  std::vector<double> barrier_trace;  // barrier value after each Newton step
};

bool DiagFeasible(const DiagProgram& program, const Vec& q, double slack = 0.0);

// Log-barrier Newton in log-coordinates x = log q, with a Hessian shift when
// R is not convex there and backtracking that keeps every iterate strictly
// feasible. q_start must be strictly feasible. Afterwards the weighted
// coordinates are pulled down onto the rate boundary and zero-weight
// coordinates are pushed to their largest feasible value.
DiagResult BarrierNewtonDiag(const DiagProgram& program, const Vec& q_start,
                             const BarrierOptions& options = {});

using SmoothFn = std::function<double(const Vec& x, Vec* grad)>;
using Projector = std::function<Vec(const Vec& x)>;

struct GradientOptions {
  double tolerance = 1e-9;  // relative projected-gradient norm
  int max_iterations = 300;
};

struct GradientResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

// Projected gradient with Barzilai-Borwein trial steps and Armijo
// backtracking; every accepted step is a non-increase of the objective.
GradientResult ProjectedGradient(const SmoothFn& objective,
                                 const Projector& project, const Vec& x0,
                                 const GradientOptions& options = {});

Vec ProjectOntoBall(const Vec& x, double radius);

// Euclidean projection onto {x : sum_j a_j x_j^2 <= 1, sum_j b_j x_j^2 <= 1}
// with a, b >= 0 elementwise. Pass an empty b for a single ellipsoid.
Vec ProjectOntoDiagEllipsoids(const Vec& v, const Vec& a, const Vec& b);

}  // namespace vflcran::kernel

#endif  // VFLCRAN_CONVEX_KERNEL_HPP_
