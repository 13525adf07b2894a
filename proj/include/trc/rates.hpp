#pragma once

#include <utility>

#include "trc/channel.hpp"

namespace trc {

// Rectangular rate region [0, r1Max] x [0, r2Max], bits per dimension.
struct RateRegion {
  double r1_max = 0.0;
  double r2_max = 0.0;
  enum class Kind { CutSet, Achievable } kind = Kind::CutSet;
};

// r_i <= min{ 1/2 log2(1 + P_i / sigma_R^2), 1/2 log2(1 + P_R / sigma_j^2) }.
RateRegion cutset_region(const ChannelParams& params);

// r_i <= min{ [1/2 log2(P_i/(P_1+P_2) + P_i/sigma_R^2)]^+,
//             1/2 log2(1 + P_R / sigma_j^2) }.
RateRegion achievable_region(const ChannelParams& params);

// Componentwise cutset - achievable; always within [0, 1/2].
std::pair<double, double> rate_gap(const ChannelParams& params);

// The uplink-only suprema (the clamped computation-rate terms).
std::pair<double, double> code_rate_condition(const ChannelParams& params);

// Error exponent for unconstrained AWGN lattice decoding at
// volume-to-noise ratio mu >= 1, in nats:
//   1/2 [(mu-1) - ln mu]   for 1 <= mu <= 2
//   1/2 ln(e mu / 4)       for 2 <= mu <= 4
//   mu / 8                 for mu >= 4
// Continuous, nondecreasing, zero at mu = 1.
double poltyrev_exponent(double mu);

// Asymptotic envelope exp(-n E_P(mu)) for decoding the effective codeword at
// per-dimension rate rate_target below the threshold r1_star (vanishing
// finite-n correction terms treated as zero).
struct ExponentCurve {
  double rate_target = 0.0;  // bits/dim
  double r1_star = 0.0;      // bits/dim
  double mu = 1.0;           // 2^{2 (r1_star - rate_target)}
  double exponent_nats = 0.0;
  int block_length = 0;
  double bound = 1.0;  // exp(-n * exponent)
};
ExponentCurve uplink_error_bound(int n, double rate_target,
                                 const ChannelParams& params);

}  // namespace trc
