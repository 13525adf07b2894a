#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "trc/rng.hpp"

namespace trc {

// Transmit powers and noise variances of the two-way relay channel.
struct ChannelParams {
  double p1 = 0.0, p2 = 0.0, pr = 0.0;
  double sigma_r2 = 0.0;   // uplink noise variance at the relay
  double sigma1_2 = 0.0;   // downlink noise variance at node 1
  double sigma2_2 = 0.0;   // downlink noise variance at node 2
  void validate() const;   // all >= 0, at least one power > 0
};

struct NoiseDraw {
  Eigen::VectorXd z;
  double variance = 0.0;
  std::uint64_t stream = 0;
  std::uint64_t block = 0;
};

NoiseDraw draw_noise(int n, double variance, CounterRng& rng);

// y_R = x1 + x2 + Z_R, Z_R iid N(0, sigma_r2).
Eigen::VectorXd uplink(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                       double sigma_r2, CounterRng& rng);

// y_i = x_R + Z_i, Z_i iid N(0, sigma_i2).
Eigen::VectorXd downlink(const Eigen::VectorXd& xr, double sigma_i2,
                         CounterRng& rng);

// Hard per-codeword power check: (1/n) sum x_t^2 <= limit. The comparison
// allows a few ulp of roundoff and nothing more.
struct PowerAudit {
  double empirical = 0.0;
  double limit = 0.0;
  bool pass = false;
};
PowerAudit audit_power(const Eigen::VectorXd& x, double limit);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace trc
