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
#ifndef VFLCRAN_UPLINK_OPT_HPP_
#define VFLCRAN_UPLINK_OPT_HPP_

#include <vector>

#include "vflcran/aircomp_link.hpp"
#include "vflcran/convex_kernel.hpp"

namespace vflcran {

// Uplink design problem: minimize sum_k ul_factor_k sigma2_UL over (m, Q_UL)
// subject to the fronthaul capacity constraint. capacity_bits may be +inf.
struct UplinkProblem {
  CMat channels;  // NM x K
  double p_ul = 0.0;
  double capacity_bits = 0.0;
  double noise_power = 0.0;
  Vec weights;  // ul_factor per device; empty means all ones
};

struct UplinkOptions {
  double tolerance = 1e-6;
  int max_outer = 50;
  int max_inner = 100;
  // Baselines freeze one block.
  bool update_beamformer = true;
  bool update_quantization = true;
};

struct ScaResult {
  CVec m;                      // scaled so m^H Qt m = 1
  std::vector<double> trace;   // max_k -|m^H g_k|^2, starting at m0
  int iterations = 0;
  bool interior_before_rescale = false;
  double kkt_residual = 0.0;   // worst subproblem residual
};

struct UplinkResult {
  UplinkDesign design;  // q in watts, zero-forcing scalars filled in
  double sigma2_ul = 0.0;
  double objective = 0.0;  // (sum ul_factor) sigma2_UL
  double capacity_bits = 0.0;
  std::vector<double> trace;  // objective at start and after each outer step
  int outer_iterations = 0;
  int interior_relaxations = 0;
};

struct UplinkStart {
  CVec m;
  Vec q;  // watts
};

// Noise floor and cap used for the diagonal of Q_UL, relative to sigma_z^2.
inline constexpr double kUplinkQMinRelative = 1e-12;

// Uplink design: SCA beamforming and quantization design, alternated until
// the iterates stop moving. A start point may be supplied; otherwise Q is
// isotropic at the capacity limit and m is the whitened matched filter of the
// weakest device.
UplinkResult OptimizeUplink(const UplinkProblem& problem,
                            const UplinkOptions& options = {},
                            const UplinkStart* start = nullptr);

// max_k -|m^H g_k|^2 over m^H Qt m <= 1 by successive tangent bounds.
// g holds normalized channels, qt the diagonal of the normalized Qt.
ScaResult ScaBeamforming(const CMat& g, const Vec& qt, const CVec& m0,
                         double tolerance = 1e-6, int max_iterations = 100);

// One SCA step: min_x max_k a_k^T x + c_k subject to x^T E x <= 1 (real
// stacked coordinates).
kernel::MinMaxResult SolveScaSubproblem(const Mat& tangents, const Vec& offsets,
                                        const Mat& ellipsoid);

// Minimizes m^H (sigma_z^2 I + Q) m over diagonal Q subject to the capacity
// constraint. Returns the diagonal of Q in watts. start (watts) is optional.
Vec OptimizeUplinkQuantization(const CVec& m, const UplinkProblem& problem,
                               const Vec* start = nullptr);

// Q = lambda I with the capacity constraint active (watts). Returns the
// floor value when the constraint is slack there; throws kInfeasible when no
// admissible lambda meets the capacity.
double IsotropicUplinkNoise(const UplinkProblem& problem);

// sum_k ul_factor_k * sigma2_UL for a beamformer and Q (watts).
double UplinkObjective(const UplinkProblem& problem, const CVec& m, const Vec& q);

// Fills eta and the zero-forcing scalars for (m, q).
UplinkDesign MakeUplinkDesign(const UplinkProblem& problem, const CVec& m,
                              const Vec& q);

}  // namespace vflcran

#endif  // VFLCRAN_UPLINK_OPT_HPP_
