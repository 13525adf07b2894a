#include "trc/rates.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trc {

namespace {

double clamp_plus(double x) { return x > 0.0 ? x : 0.0; }

double half_log2(double x) { return 0.5 * std::log2(x); }

void require_noise(const ChannelParams& p) {
  p.validate();
  if (!(p.sigma_r2 > 0) || !(p.sigma1_2 > 0) || !(p.sigma2_2 > 0)) {
    throw std::invalid_argument(
        "rate formulas need strictly positive noise variances");
  }
}

}  // namespace

RateRegion cutset_region(const ChannelParams& p) {
  require_noise(p);
  RateRegion r;
  r.kind = RateRegion::Kind::CutSet;
  r.r1_max = std::min(half_log2(1.0 + p.p1 / p.sigma_r2),
                      half_log2(1.0 + p.pr / p.sigma2_2));
  r.r2_max = std::min(half_log2(1.0 + p.p2 / p.sigma_r2),
                      half_log2(1.0 + p.pr / p.sigma1_2));
  return r;
}

RateRegion achievable_region(const ChannelParams& p) {
  require_noise(p);
  if (!(p.p1 + p.p2 > 0)) {
    throw std::invalid_argument("achievable region needs p1 + p2 > 0");
  }
  RateRegion r;
  r.kind = RateRegion::Kind::Achievable;
  const double up1 =
      clamp_plus(half_log2(p.p1 / (p.p1 + p.p2) + p.p1 / p.sigma_r2));
  const double up2 =
      clamp_plus(half_log2(p.p2 / (p.p1 + p.p2) + p.p2 / p.sigma_r2));
  r.r1_max = std::min(up1, half_log2(1.0 + p.pr / p.sigma2_2));
  r.r2_max = std::min(up2, half_log2(1.0 + p.pr / p.sigma1_2));
  return r;
}

std::pair<double, double> rate_gap(const ChannelParams& p) {
  const RateRegion cut = cutset_region(p);
  const RateRegion ach = achievable_region(p);
  return {cut.r1_max - ach.r1_max, cut.r2_max - ach.r2_max};
}

std::pair<double, double> code_rate_condition(const ChannelParams& p) {
  require_noise(p);
  if (!(p.p1 + p.p2 > 0)) {
    throw std::invalid_argument("code rate condition needs p1 + p2 > 0");
  }
  return {clamp_plus(half_log2(p.p1 / (p.p1 + p.p2) + p.p1 / p.sigma_r2)),
          clamp_plus(half_log2(p.p2 / (p.p1 + p.p2) + p.p2 / p.sigma_r2))};
}

double poltyrev_exponent(double mu) {
  if (!(mu >= 1.0)) {
    throw std::invalid_argument("volume-to-noise ratio must be >= 1");
  }
  if (mu <= 2.0) return 0.5 * ((mu - 1.0) - std::log(mu));
  if (mu <= 4.0) return 0.5 * std::log(std::numbers::e * mu / 4.0);
  return mu / 8.0;
}

ExponentCurve uplink_error_bound(int n, double rate_target,
                                 const ChannelParams& params) {
  if (n <= 0) throw std::invalid_argument("block length must be positive");
  const auto [r1_star, r2_star] = code_rate_condition(params);
  (void)r2_star;
  if (!(rate_target < r1_star)) {
    throw std::invalid_argument(
        "rate target must be below the uplink threshold");
  }
  ExponentCurve c;
  c.rate_target = rate_target;
  c.r1_star = r1_star;
  c.block_length = n;
  c.mu = std::exp2(2.0 * (r1_star - rate_target));
  c.exponent_nats = poltyrev_exponent(c.mu);
  c.bound = std::exp(-static_cast<double>(n) * c.exponent_nats);
  return c;
}

}  // namespace trc
