#include "trc/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace trc {

void ChannelParams::validate() const {
  if (p1 < 0 || p2 < 0 || pr < 0 || sigma_r2 < 0 || sigma1_2 < 0 ||
      sigma2_2 < 0) {
    throw std::invalid_argument("channel powers and variances must be >= 0");
  }
  if (p1 == 0 && p2 == 0 && pr == 0) {
    throw std::invalid_argument("at least one transmit power must be positive");
  }
}

NoiseDraw draw_noise(int n, double variance, CounterRng& rng) {
  if (variance < 0) throw std::invalid_argument("noise variance must be >= 0");
  NoiseDraw d;
  d.variance = variance;
  d.stream = rng.stream_id();
  d.block = rng.block();
  d.z = Eigen::VectorXd::Zero(n);
  if (variance > 0) {
    const double sd = std::sqrt(variance);
    for (int i = 0; i < n; ++i) d.z(i) = sd * rng.next_gaussian();
  }
  return d;
}

Eigen::VectorXd uplink(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                       double sigma_r2, CounterRng& rng) {
  if (x1.size() != x2.size()) {
    throw std::invalid_argument("uplink inputs must have equal length");
  }
  return x1 + x2 + draw_noise(static_cast<int>(x1.size()), sigma_r2, rng).z;
}

Eigen::VectorXd downlink(const Eigen::VectorXd& xr, double sigma_i2,
                         CounterRng& rng) {
  return xr + draw_noise(static_cast<int>(xr.size()), sigma_i2, rng).z;
}

PowerAudit audit_power(const Eigen::VectorXd& x, double limit) {
  PowerAudit a;
  a.empirical = x.squaredNorm() / static_cast<double>(x.size());
  a.limit = limit;
  // Roundoff guard only (e.g. sqrt(P)^2 may exceed P by an ulp).
  a.pass = a.empirical <= limit + 4.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, limit);
  return a;
}

}  // namespace trc
