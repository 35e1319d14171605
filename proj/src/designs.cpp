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
#include <cmath>
#include <complex>
#include <limits>

#include "vflcran/downlink_opt.hpp"
#include "vflcran/scenario.hpp"
#include "vflcran/uplink_opt.hpp"

namespace vflcran {

namespace {

struct UplinkPick {
  CVec m;
  Vec q;
  double objective = std::numeric_limits<double>::infinity();
};

struct DownlinkPick {
  CVec u;
  Vec q;
  double objective = std::numeric_limits<double>::infinity();
};

UplinkProblem MakeUplinkProblem(const ChannelState& ch, const LinkBudget& b) {
  UplinkProblem p;
  p.channels = ch.uplink;
  p.p_ul = b.p_ul;
  p.capacity_bits = b.capacity_bits;
  p.noise_power = ch.noise_power;
  return p;
}

DownlinkProblem MakeDownlinkProblem(const ChannelState& ch, const LinkBudget& b,
                                    const Vec& dl_factor) {
  DownlinkProblem p;
  p.channels = ch.downlink;
  p.p_dl = b.p_dl;
  p.capacity_bits = b.capacity_bits;
  p.noise_power = ch.noise_power;
  p.weights = dl_factor;
  return p;
}

UplinkPick Pick(const UplinkResult& r) {
  return {r.design.m, r.design.q, r.objective};
}
DownlinkPick Pick(const DownlinkResult& r) {
  return {r.design.u, r.design.q, r.objective};
}

// Solver failures get one retry from a perturbed start before the round is
// abandoned.
CVec PhaseRamp(const CVec& v) {
  CVec out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(i) *= std::polar(1.0, 0.37 * static_cast<double>(i + 1));
  }
  return out;
}

UplinkResult RunUplink(const UplinkProblem& p, const UplinkOptions& o,
                       const UplinkStart* start, const UplinkStart& fallback) {
  try {
    return OptimizeUplink(p, o, start);
  } catch (const Error&) {
    const UplinkStart& base = start != nullptr ? *start : fallback;
    const UplinkStart retry{PhaseRamp(base.m), base.q * 1.5};
    return OptimizeUplink(p, o, &retry);
  }
}

DownlinkResult RunDownlink(const DownlinkProblem& p, const DownlinkOptions& o,
                           const DownlinkStart* start, const DownlinkStart& fallback) {
  try {
    return OptimizeDownlink(p, o, start);
  } catch (const Error&) {
    const DownlinkStart& base = start != nullptr ? *start : fallback;
    const DownlinkStart retry{PhaseRamp(base.u), base.q};
    return OptimizeDownlink(p, o, &retry);
  }
}

UplinkPick UniformUplink(const UplinkProblem& p) {
  const auto dim = p.channels.rows();
  UplinkPick pick;
  pick.m = CVec::Constant(dim, cplx(std::sqrt(1.0 / static_cast<double>(dim)), 0.0));
  pick.q = Vec::Constant(dim, IsotropicUplinkNoise(p));
  pick.objective = UplinkObjective(p, pick.m, pick.q);
  return pick;
}

DownlinkPick UniformDownlink(const DownlinkProblem& p) {
  const auto dim = p.channels.rows();
  const double n = static_cast<double>(dim);
  double power_u = 0.5 * p.p_dl;
  if (std::isfinite(p.capacity_bits)) {
    power_u = std::min(power_u, p.p_dl / (1.0 + n / (std::exp2(p.capacity_bits) - 1.0)));
  }
  DownlinkPick pick;
  pick.u = CVec::Constant(dim, cplx(std::sqrt(power_u / n), 0.0));
  pick.q = Vec::Constant(dim, IsotropicDownlinkNoise(p, pick.u));
  const double spare = p.p_dl - pick.q.sum();
  if (pick.u.squaredNorm() > spare) pick.u *= std::sqrt(spare / pick.u.squaredNorm());
  pick.objective = DownlinkObjective(p, pick.u, pick.q);
  return pick;
}

DesignPair Assemble(const ChannelState& ch, const UplinkProblem& up,
                    const DownlinkProblem& dp, const UplinkPick& u,
                    const DownlinkPick& d) {
  DesignPair pair;
  pair.uplink = MakeUplinkDesign(up, u.m, u.q);
  pair.downlink = MakeDownlinkDesign(dp, d.u, d.q);
  pair.sigma2_ul = UplinkNoiseVariance(pair.uplink.m, pair.uplink.eta, pair.uplink.q,
                                       ch.noise_power);
  pair.sigma2_dl.resize(ch.downlink.cols());
  for (Eigen::Index k = 0; k < ch.downlink.cols(); ++k) {
    pair.sigma2_dl(k) = DownlinkNoiseVariance(pair.downlink.b(k), ch.downlink.col(k),
                                              pair.downlink.q, ch.noise_power);
  }
  pair.uplink_objective = u.objective;
  pair.downlink_objective = d.objective;
  return pair;
}

}  // namespace

LinkBudget BudgetFromConfig(const ExperimentConfig& config) {
  return {config.UplinkPowerWatts(), config.DownlinkPowerWatts(), config.CapacityBits()};
}

DesignPair BaselineDesign(const ChannelState& channels, Scheme scheme,
                          const LinkBudget& budget, const Vec& dl_factor) {
  Require(scheme == Scheme::kBaseline1 || scheme == Scheme::kBaseline2 ||
              scheme == Scheme::kBaseline3,
          ErrorCode::kInvalidArgument, "not a baseline scheme");
  DesignSet set(channels, budget, dl_factor);
  return set.Get(scheme);
}

DesignSet::DesignSet(const ChannelState& channels, const LinkBudget& budget,
                     const Vec& dl_factor)
    : channels_(channels), budget_(budget), dl_factor_(dl_factor) {}

const DesignPair& DesignSet::Get(Scheme scheme) {
  if (scheme == Scheme::kMassiveMimo) scheme = Scheme::kJoint;
  Require(scheme != Scheme::kErrorFree, ErrorCode::kInvalidArgument,
          "error-free runs need no design");
  auto it = cache_.find(scheme);
  if (it != cache_.end()) return it->second;

  const UplinkProblem up = MakeUplinkProblem(channels_, budget_);
  const DownlinkProblem dp = MakeDownlinkProblem(channels_, budget_, dl_factor_);
  const UplinkPick ul1 = UniformUplink(up);
  const DownlinkPick dl1 = UniformDownlink(dp);
  const UplinkStart ul1_start{ul1.m, ul1.q};
  const DownlinkStart dl1_start{dl1.u, dl1.q};

  DesignPair pair;
  switch (scheme) {
    case Scheme::kBaseline1:
      pair = Assemble(channels_, up, dp, ul1, dl1);
      break;
    case Scheme::kBaseline2: {
      UplinkOptions uo;
      uo.update_quantization = false;
      UplinkPick ul = Pick(RunUplink(up, uo, &ul1_start, ul1_start));
      const UplinkPick alt = Pick(RunUplink(up, uo, nullptr, ul1_start));
      if (alt.objective < ul.objective) ul = alt;
      DownlinkOptions dopt;
      dopt.update_quantization = false;
      const DownlinkPick dl = Pick(RunDownlink(dp, dopt, &dl1_start, dl1_start));
      pair = Assemble(channels_, up, dp, ul, dl);
      break;
    }
    case Scheme::kBaseline3: {
      UplinkOptions uo;
      uo.update_beamformer = false;
      const UplinkPick ul = Pick(RunUplink(up, uo, &ul1_start, ul1_start));
      DownlinkOptions dopt;
      dopt.update_beamformer = false;
      const DownlinkPick dl = Pick(RunDownlink(dp, dopt, &dl1_start, dl1_start));
      pair = Assemble(channels_, up, dp, ul, dl);
      break;
    }
    case Scheme::kJoint: {
      const DesignPair& b2 = Get(Scheme::kBaseline2);
      const DesignPair& b3 = Get(Scheme::kBaseline3);
      UplinkPick ul = Pick(RunUplink(up, {}, nullptr, ul1_start));
      const DesignPair& ul_base =
          b2.uplink_objective <= b3.uplink_objective ? b2 : b3;
      if (ul_base.uplink_objective < ul.objective) {
        const UplinkStart s{ul_base.uplink.m, ul_base.uplink.q};
        const UplinkPick alt = Pick(RunUplink(up, {}, &s, ul1_start));
        if (alt.objective < ul.objective) ul = alt;
      }
      DownlinkPick dl = Pick(RunDownlink(dp, {}, nullptr, dl1_start));
      const DesignPair& dl_base =
          b2.downlink_objective <= b3.downlink_objective ? b2 : b3;
      if (dl_base.downlink_objective < dl.objective) {
        const DownlinkStart s{dl_base.downlink.u, dl_base.downlink.q};
        const DownlinkPick alt = Pick(RunDownlink(dp, {}, &s, dl1_start));
        if (alt.objective < dl.objective) dl = alt;
      }
      pair = Assemble(channels_, up, dp, ul, dl);
      break;
    }
    default:
      throw Error(ErrorCode::kInvalidArgument, "unsupported scheme");
  }
  return cache_.emplace(scheme, std::move(pair)).first->second;
}

}  // namespace vflcran
