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
#ifndef VFLCRAN_DOWNLINK_OPT_HPP_
#define VFLCRAN_DOWNLINK_OPT_HPP_

#include <vector>

#include "vflcran/aircomp_link.hpp"

namespace vflcran {

// Downlink design problem: minimize sum_k dl_factor_k sigma2_DL,k over (u, Q_DL)
// subject to total power and fronthaul capacity. capacity_bits may be +inf.
struct DownlinkProblem {
  CMat channels;  // NM x K
  double p_dl = 0.0;
  double capacity_bits = 0.0;
  double noise_power = 0.0;
  Vec weights;  // dl_factor per device; empty means all ones
};

struct DownlinkOptions {
  double tolerance = 1e-6;
  int max_iterations = 50;
  // Baselines freeze one block; the joint power rescaling stays on.
  bool update_beamformer = true;
  bool update_quantization = true;
};

// Objective after each block update of one outer iteration.
struct DownlinkStep {
  double after_q = 0.0;
  double after_u = 0.0;
  double after_rescale = 0.0;
  double after_sigma = 0.0;
  // Largest true capacity over surrogate-feasible iterates minus C (bits).
  double surrogate_gap_bits = 0.0;
};

struct DownlinkResult {
  DownlinkDesign design;  // watts, receive scalars filled in
  Vec sigma2_dl;          // per device
  double objective = 0.0; // sum_k dl_factor_k sigma2_DL,k
  double capacity_bits = 0.0;
  double power = 0.0;
  double initial_objective = 0.0;
  std::vector<DownlinkStep> steps;
  int iterations = 0;
};

struct DownlinkStart {
  CVec u;
  Vec q;  // watts
};

// log|Sigma| + Tr(Sigma^{-1} Omega) - n, an upper bound on log|Omega|.
double LogdetMajorant(const CMat& omega, const CMat& sigma);

// Sigma = u u^H + diag(q).
CMat SigmaUpdate(const CVec& u, const Vec& q);

// Quantization step with u and Sigma = sigma_u sigma_u^H + diag(sigma_q) fixed. Minimizes sum_j a_j q_j with
// a_j = sum_k dl_factor_k |h_kj|^2 / (2 |h_k^H u|^2) subject to the majorized
// capacity constraint, q >= q_min and |u|^2 + sum q <= P. Watts in and out.
// Returns q_prev when no strictly feasible point exists.
Vec SolveDownlinkQ(const DownlinkProblem& problem, const CVec& u,
                   const CVec& sigma_u, const Vec& sigma_q, const Vec& q_prev);

// Beamformer step with Q fixed: projected gradient over the power ball and
// the capacity ellipsoid u^H Q^{-1} u <= 2^C - 1.
CVec SolveDownlinkU(const DownlinkProblem& problem, const Vec& q,
                    const CVec& u0);

// Alternating downlink design (Q step, u step, Sigma update) with an added
// joint power-rescaling step.
DownlinkResult OptimizeDownlink(const DownlinkProblem& problem,
                                const DownlinkOptions& options = {},
                                const DownlinkStart* start = nullptr);

// Equal-gain start: u along sum_k h_k / |h_k| with |u|^2 = P/2 (less when
// the capacity would push Q over the power budget), Q isotropic at the
// capacity limit.
DownlinkStart DownlinkInitialPoint(const DownlinkProblem& problem);

// Isotropic Q for a given u: capacity equality, floored at q_min.
double IsotropicDownlinkNoise(const DownlinkProblem& problem, const CVec& u);

double DownlinkQMin(const DownlinkProblem& problem);

double DownlinkObjective(const DownlinkProblem& problem, const CVec& u,
                         const Vec& q);

DownlinkDesign MakeDownlinkDesign(const DownlinkProblem& problem, const CVec& u,
                                  const Vec& q);

}  // namespace vflcran

#endif  // VFLCRAN_DOWNLINK_OPT_HPP_
