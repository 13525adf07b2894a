#include "trc/codec.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace trc {

namespace {

void check_node(int node) {
  if (node != 1 && node != 2) {
    throw std::invalid_argument("node must be 1 or 2");
  }
}

void check_dim(const LatticeChain& chain, const Eigen::VectorXd& v,
               const char* what) {
  if (v.size() != chain.dim()) {
    throw std::invalid_argument(std::string(what) + ": wrong dimension");
  }
}

void check_member(const LatticeChain& chain, const Eigen::VectorXd& v,
                  const char* what) {
  check_dim(chain, v, what);
  // Any fine-lattice representative of a coset is accepted; the mod algebra
  // is coset-invariant and outputs are reduced canonically.
  if (chain.fine().mod(v).cwiseAbs().maxCoeff() >
      chain.fine().coord_tolerance()) {
    throw std::invalid_argument(std::string(what) +
                                ": not a point of the fine lattice");
  }
}

}  // namespace

SourceMessage message_from_index(const LatticeChain& chain, int node,
                                 std::size_t index) {
  check_node(node);
  const auto& set = chain.leaders(node);
  if (index >= set.size()) {
    throw std::invalid_argument("message index out of range");
  }
  return SourceMessage{node, index, set[index]};
}

SourceMessage draw_message(const LatticeChain& chain, int node,
                           CounterRng& rng) {
  check_node(node);
  SourceMessage msg;
  msg.node = node;
  msg.leader = chain.draw_leader(node, rng);
  return msg;
}

Dither draw_dither(const LatticeChain& chain, int node, CounterRng& rng) {
  check_node(node);
  const Lattice& shape = chain.shaping(node);
  const int n = chain.dim();
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u(i) = rng.next_unit();
  // Uniform on a fundamental parallelepiped, folded into the Voronoi region.
  return Dither{node, shape.mod(shape.generator() * u)};
}

Eigen::VectorXd encode_source(const LatticeChain& chain,
                              const SourceMessage& msg, const Dither& dither) {
  if (msg.node != dither.node) {
    throw std::invalid_argument("message and dither belong to different nodes");
  }
  check_dim(chain, msg.leader, "message");
  check_dim(chain, dither.u, "dither");
  return chain.shaping(msg.node).mod(msg.leader + dither.u);
}

double mmse_alpha(double p1, double p2, double sigma_r2) {
  if (p1 < 0 || p2 < 0 || sigma_r2 < 0) {
    throw std::invalid_argument("powers and variance must be >= 0");
  }
  const double s = p1 + p2;
  if (s + sigma_r2 <= 0) {
    throw std::invalid_argument("mmse coefficient undefined for all-zero input");
  }
  return s / (s + sigma_r2);
}

double mmse_alpha(const ChannelParams& params) {
  return mmse_alpha(params.p1, params.p2, params.sigma_r2);
}

Eigen::VectorXd compute_effective_t(const LatticeChain& chain,
                                    const Eigen::VectorXd& w1,
                                    const Eigen::VectorXd& w2,
                                    const Eigen::VectorXd& u2) {
  check_member(chain, w1, "w1");
  check_member(chain, w2, "w2");
  check_dim(chain, u2, "u2");
  return chain.coarse().mod(w1 + w2 - chain.mid().quantize(w2 + u2));
}

Eigen::VectorXd relay_decode(const LatticeChain& chain,
                             const Eigen::VectorXd& y_r,
                             const Eigen::VectorXd& u1,
                             const Eigen::VectorXd& u2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  check_dim(chain, y_r, "y_r");
  check_dim(chain, u1, "u1");
  check_dim(chain, u2, "u2");
  const Eigen::VectorXd folded = chain.coarse().mod(alpha * y_r - u1 - u2);
  return chain.coarse().mod(chain.fine().quantize(folded));
}

Eigen::VectorXd effective_noise(const Eigen::VectorXd& x1,
                                const Eigen::VectorXd& x2,
                                const Eigen::VectorXd& z_r, double alpha) {
  return -(1.0 - alpha) * (x1 + x2) + alpha * z_r;
}

RelayCodebook build_relay_codebook(const LatticeChain& chain, double p_r,
                                   std::uint64_t seed, double delta) {
  if (!(p_r > 0)) throw std::invalid_argument("relay power must be positive");
  if (!(delta >= 0 && delta < 1)) {
    throw std::invalid_argument("delta must lie in [0, 1)");
  }
  const auto& set = chain.leaders(1);
  const int n = chain.dim();
  RelayCodebook cb;
  cb.power_limit = p_r;
  cb.draw_variance = (1.0 - delta) * p_r;
  cb.seed = seed;
  cb.words.reserve(set.size());
  const double sd = std::sqrt(cb.draw_variance);
  double power_sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    CounterRng rng(seed, Stream::Codebook, i);
    Eigen::VectorXd w(n);
    bool ok = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (int j = 0; j < n; ++j) w(j) = sd * rng.next_gaussian();
      if (w.squaredNorm() / n <= p_r) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::runtime_error(
          "could not draw a codeword within the power constraint");
    }
    power_sum += w.squaredNorm() / n;
    cb.words.push_back(std::move(w));
  }
  cb.mean_power = power_sum / static_cast<double>(set.size());
  return cb;
}

std::vector<std::size_t> restricted_bin_indices(const LatticeChain& chain,
                                                const NodeSide& side) {
  check_node(side.node);
  check_member(chain, side.own_message, "own message");
  check_dim(chain, side.u2, "u2");
  std::vector<std::size_t> out;
  if (side.node == 1) {
    // Unknown w2 runs over C_2; |set| = |C_2|.
    const auto& c2 = chain.leaders(2);
    out.reserve(c2.size());
    for (const auto& w2 : c2) {
      const Eigen::VectorXd t = chain.coarse().mod(
          side.own_message + w2 - chain.mid().quantize(w2 + side.u2));
      out.push_back(chain.leader_index(1, t));
    }
  } else {
    // Unknown w1 runs over C_1; |set| = |C_1|. The node-2 quantizer term is
    // fixed by the side information.
    const auto& c1 = chain.leaders(1);
    const Eigen::VectorXd q2 =
        chain.mid().quantize(side.own_message + side.u2);
    out.reserve(c1.size());
    for (const auto& w1 : c1) {
      const Eigen::VectorXd t =
          chain.coarse().mod(w1 + side.own_message - q2);
      out.push_back(chain.leader_index(1, t));
    }
  }
  return out;
}

Eigen::VectorXd node_decode_relay(const RelayCodebook& codebook,
                                  const LatticeChain& chain,
                                  const Eigen::VectorXd& y,
                                  const NodeSide& side) {
  check_dim(chain, y, "y");
  const std::vector<std::size_t> bins = restricted_bin_indices(chain, side);
  if (codebook.words.size() != chain.leaders(1).size()) {
    throw std::invalid_argument("codebook does not match the chain");
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = SIZE_MAX;
  for (std::size_t idx : bins) {
    const double d = (y - codebook.words[idx]).squaredNorm();
    // Ties resolve to the lowest canonical index.
    if (d < best || (d == best && idx < best_idx)) {
      best = d;
      best_idx = idx;
    }
  }
  return chain.leaders(1)[best_idx];
}

Eigen::VectorXd recover_w2(const LatticeChain& chain,
                           const Eigen::VectorXd& t1_hat,
                           const Eigen::VectorXd& w1) {
  check_member(chain, t1_hat, "t1_hat");
  check_member(chain, w1, "w1");
  return chain.mid().mod(t1_hat - w1);
}

Eigen::VectorXd recover_w1(const LatticeChain& chain,
                           const Eigen::VectorXd& t2_hat,
                           const Eigen::VectorXd& w2,
                           const Eigen::VectorXd& u2) {
  check_member(chain, t2_hat, "t2_hat");
  check_member(chain, w2, "w2");
  check_dim(chain, u2, "u2");
  return chain.coarse().mod(t2_hat - w2 + chain.mid().quantize(w2 + u2));
}

}  // namespace trc
