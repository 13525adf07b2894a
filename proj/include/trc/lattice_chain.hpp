#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "trc/lattice.hpp"

namespace trc {

// Thrown when a coset-leader set is larger than the enumeration cap; carries
// the cap that would be required.
class EnumerationCapError : public std::runtime_error {
 public:
  EnumerationCapError(std::uint64_t required, std::uint64_t cap);
  std::uint64_t required_cap() const { return required_; }

 private:
  std::uint64_t required_;
};

// Parameters from which a chain is rebuilt exactly; this is also the JSON
// serialization schema ({family, n, generator, k1, k2, scale | p, g1, g2}).
struct ChainDescription {
  std::string family = "scaled-cubic";
  int n = 0;
  std::string base;                          // named base ("z","a2","d4","e8") or ""
  std::vector<double> generator_row_major;   // base generator (self-similar families)
  int k1 = 1;
  int k2 = 1;
  double scale = 1.0;
  long p = 0;                                // construction-a
  std::vector<std::vector<long>> g1, g2;     // generator rows of the p-ary codes
};

void to_json(nlohmann::json& j, const ChainDescription& d);
void from_json(const nlohmann::json& j, ChainDescription& d);

// A nested pair of shaping lattices inside a common fine (coding) lattice:
// coarse() ⊆ mid() ⊆ fine(). Level 1 is the coarse lattice with coset
// leaders C_1 (message alphabet of the high-power node), level 2 the mid
// lattice with C_2. Leaders are enumerated on demand in canonical
// (lexicographic) order; that order is the message-index bijection.
class LatticeChain {
 public:
  static constexpr std::uint64_t kDefaultEnumerationCap = 1ull << 20;

  // Trivial 1-d unit chain; builders produce the real thing.
  LatticeChain() = default;

  int dim() const { return fine_.dim(); }
  const Lattice& fine() const { return fine_; }
  const Lattice& mid() const { return mid_; }
  const Lattice& coarse() const { return coarse_; }
  const Lattice& shaping(int level) const;  // level 1 -> coarse, 2 -> mid

  double rate1() const { return rate1_; }  // bits per dimension, (1/n) log2 |C_1|
  double rate2() const { return rate2_; }
  double rate(int level) const { return level == 1 ? rate1_ : rate2_; }

  // |C_level| = Vol(shaping)/Vol(fine); exact while it fits a double.
  double leader_count(int level) const;

  // Canonically ordered coset leaders; throws EnumerationCapError when
  // |C_level| exceeds the cap.
  const std::vector<Eigen::VectorXd>& leaders(
      int level, std::uint64_t cap = kDefaultEnumerationCap) const;

  // Index of a leader in the canonical order; throws std::invalid_argument
  // if v is not (within tolerance) a leader.
  std::size_t leader_index(int level, const Eigen::VectorXd& v) const;

  bool is_leader(int level, const Eigen::VectorXd& v) const;

  // Uniform draw over the cosets without materializing the leader set.
  Eigen::VectorXd draw_leader(int level, CounterRng& rng) const;

  // Realized second moment (transmit power) of the shaping lattice at a
  // level. Self-similar chains derive level 1 from the level-2 estimate via
  // the exact k1^2 scaling relation so the two stay consistent.
  SecondMomentEstimate shaping_power(int level,
                                     std::uint64_t mc_budget = kPowerMcBudget,
                                     std::uint64_t seed = kPowerMcSeed) const;

  const ChainDescription& description() const { return desc_; }

  static constexpr std::uint64_t kPowerMcBudget = 200000;
  static constexpr std::uint64_t kPowerMcSeed = 0x5eedf00dull;

  friend LatticeChain build_self_similar_chain(const Lattice& base, int k1,
                                               int k2, double scale,
                                               const std::string& base_name);
  friend LatticeChain build_construction_a_chain(
      long p, int n, const std::vector<std::vector<long>>& g2,
      const std::vector<std::vector<long>>& g1);

 private:
  // Cosets at each level are indexed by digit vectors: coefficients of the
  // fine basis running over {0..digit_base-1} at digit_positions.
  struct LevelIndexing {
    std::uint64_t digit_base = 1;
    std::vector<int> digit_positions;
  };
  struct LeaderCache {
    std::once_flag once;
    std::vector<Eigen::VectorXd> leaders;
  };

  const LevelIndexing& indexing(int level) const;
  std::uint64_t enumerable_count(int level) const;  // saturates at max uint64

  ChainDescription desc_;
  Lattice fine_{Lattice::scaled_cubic(1, 1.0)};
  Lattice mid_{Lattice::scaled_cubic(1, 1.0)};
  Lattice coarse_{Lattice::scaled_cubic(1, 1.0)};
  LevelIndexing idx1_, idx2_;
  double rate1_ = 0.0, rate2_ = 0.0;
  int k1_ = 1;  // sigma^2(coarse)/sigma^2(mid) scale factor for self-similar
  std::shared_ptr<LeaderCache> cache1_ = std::make_shared<LeaderCache>();
  std::shared_ptr<LeaderCache> cache2_ = std::make_shared<LeaderCache>();
};

// fine = scale*base, mid = (k2*scale)*base, coarse = (k1*k2*scale)*base.
// Nesting holds by construction; rate2 = log2 k2, rate1 = log2(k1 k2).
LatticeChain build_self_similar_chain(const Lattice& base, int k1, int k2,
                                      double scale,
                                      const std::string& base_name = "");

// fine = Z^n; mid/coarse lift p-ary linear codes (rows g2 ⊇ rows g1) to
// lattices {x in Z^n : x mod p in code}. Rates move in (k/n) log2 p steps.
LatticeChain build_construction_a_chain(
    long p, int n, const std::vector<std::vector<long>>& g2,
    const std::vector<std::vector<long>>& g1);

// Rebuild a chain from its description (JSON round-trips are bit-exact).
LatticeChain build_chain(const ChainDescription& desc);

// Canonically ordered coset leaders of C_level.
const std::vector<Eigen::VectorXd>& enumerate_coset_leaders(
    const LatticeChain& chain, int level,
    std::uint64_t cap = LatticeChain::kDefaultEnumerationCap);

// Self-similar chain scaled so sigma^2(mid) = p2 and k1 = round(sqrt(p1/p2)).
// The realized high-power constraint k1^2 * p2 generally differs from p1 and
// is what gets reported and used downstream.
struct MatchedChain {
  LatticeChain chain;
  double p1_realized = 0.0;
  double p2_realized = 0.0;
  int k1 = 1;
  SecondMomentEstimate base_second_moment;
};
MatchedChain match_chain_to_powers(const Lattice& base, int k2, double p1,
                                   double p2,
                                   std::uint64_t mc_budget = LatticeChain::kPowerMcBudget,
                                   std::uint64_t seed = LatticeChain::kPowerMcSeed,
                                   const std::string& base_name = "");

}  // namespace trc
