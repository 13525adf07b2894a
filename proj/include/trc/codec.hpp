#pragma once

#include <cstdint>
#include <vector>

#include "trc/channel.hpp"
#include "trc/lattice_chain.hpp"

namespace trc {

// A message of node i is a coset leader of C_i; index is the position in the
// canonical leader order (the message-index bijection). index is
// SIZE_MAX when the leader set was never materialized (draws past the
// enumeration cap).
struct SourceMessage {
  int node = 1;  // 1 or 2
  std::size_t index = SIZE_MAX;
  Eigen::VectorXd leader;
};

SourceMessage message_from_index(const LatticeChain& chain, int node,
                                 std::size_t index);
// Uniform over C_node; does not require the leader set to be enumerable.
SourceMessage draw_message(const LatticeChain& chain, int node,
                           CounterRng& rng);

// Dither vector, uniform on the Voronoi region of the node's shaping lattice.
struct Dither {
  int node = 1;
  Eigen::VectorXd u;
};
Dither draw_dither(const LatticeChain& chain, int node, CounterRng& rng);

// X_i = (W_i + U_i) mod shaping lattice of node i.
Eigen::VectorXd encode_source(const LatticeChain& chain,
                              const SourceMessage& msg, const Dither& dither);

// alpha = (P1 + P2) / (P1 + P2 + sigma_R^2); in [0, 1), -> 1 as noise -> 0.
double mmse_alpha(const ChannelParams& params);
double mmse_alpha(double p1, double p2, double sigma_r2);

// Ground-truth effective codeword the relay should decode:
// T = (W_1 + W_2 - Q_2(W_2 + U_2)) mod coarse. Also the binning map from
// message pairs to T.
Eigen::VectorXd compute_effective_t(const LatticeChain& chain,
                                    const Eigen::VectorXd& w1,
                                    const Eigen::VectorXd& w2,
                                    const Eigen::VectorXd& u2);

// T_hat = (Q_fine((alpha y_R - U_1 - U_2) mod coarse)) mod coarse.
Eigen::VectorXd relay_decode(const LatticeChain& chain,
                             const Eigen::VectorXd& y_r,
                             const Eigen::VectorXd& u1,
                             const Eigen::VectorXd& u2, double alpha);

// -(1 - alpha)(x1 + x2) + alpha z_r.
Eigen::VectorXd effective_noise(const Eigen::VectorXd& x1,
                                const Eigen::VectorXd& x2,
                                const Eigen::VectorXd& z_r, double alpha);

// Downlink codebook: one Gaussian n-sequence per t in C_1, keyed by the
// canonical coset order. Codewords are drawn with variance (1-delta)*p_r and
// redrawn (up to a bounded number of attempts) if they break the hard
// per-codeword power constraint.
struct RelayCodebook {
  std::vector<Eigen::VectorXd> words;  // words[i] <-> leaders(1)[i]
  double power_limit = 0.0;            // p_r
  double draw_variance = 0.0;          // (1 - delta) * p_r
  double mean_power = 0.0;             // empirical average over the codebook
  std::uint64_t seed = 0;
};
RelayCodebook build_relay_codebook(const LatticeChain& chain, double p_r,
                                   std::uint64_t seed, double delta = 0.05);

// Side information available to a node for downlink decoding: its own
// message and the shared node-2 dither.
struct NodeSide {
  int node = 1;
  Eigen::VectorXd own_message;  // W_1 for node 1, W_2 for node 2
  Eigen::VectorXd u2;
};

// The candidate effective codewords consistent with a node's side
// information, as canonical C_1 indices. Node 1 runs over w2 in C_2
// (|set| = |C_2|), node 2 over w1 in C_1 (|set| = |C_1|); both always
// contain the true T.
std::vector<std::size_t> restricted_bin_indices(const LatticeChain& chain,
                                                const NodeSide& side);

// Maximum-likelihood decoding over the restricted codebook: returns the
// candidate t minimizing ||y - X_R(t)||^2, ties to the lowest canonical
// index.
Eigen::VectorXd node_decode_relay(const RelayCodebook& codebook,
                                  const LatticeChain& chain,
                                  const Eigen::VectorXd& y,
                                  const NodeSide& side);

// W2_hat = (T1_hat - W_1) mod mid; exact whenever T1_hat is the true T.
Eigen::VectorXd recover_w2(const LatticeChain& chain,
                           const Eigen::VectorXd& t1_hat,
                           const Eigen::VectorXd& w1);

// W1_hat = (T2_hat - W_2 + Q_2(W_2 + U_2)) mod coarse; exact for true T.
Eigen::VectorXd recover_w1(const LatticeChain& chain,
                           const Eigen::VectorXd& t2_hat,
                           const Eigen::VectorXd& w2,
                           const Eigen::VectorXd& u2);

}  // namespace trc
