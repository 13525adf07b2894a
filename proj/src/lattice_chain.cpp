#include "trc/lattice_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trc {

EnumerationCapError::EnumerationCapError(std::uint64_t required,
                                         std::uint64_t cap)
    : std::runtime_error("coset enumeration needs cap >= " +
                         std::to_string(required) + " (configured cap " +
                         std::to_string(cap) + ")"),
      required_(required) {}

namespace {

bool is_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

long mod_p(long v, long p) {
  long r = v % p;
  return r < 0 ? r + p : r;
}

long inverse_mod_p(long a, long p) {
  // Fermat: a^(p-2) mod p.
  long result = 1, base = mod_p(a, p), e = p - 2;
  while (e > 0) {
    if (e & 1) result = result * base % p;
    base = base * base % p;
    e >>= 1;
  }
  return result;
}

struct RrefResult {
  std::vector<std::vector<long>> rows;  // reduced rows, entries in [0, p)
  std::vector<int> pivots;              // pivot column per row
};

// Row-reduce a p-ary generator over GF(p).
RrefResult rref_mod_p(std::vector<std::vector<long>> rows, long p, int n) {
  for (auto& r : rows) {
    if (static_cast<int>(r.size()) != n) {
      throw std::invalid_argument("code generator row has wrong length");
    }
    for (auto& v : r) v = mod_p(v, p);
  }
  RrefResult out;
  std::size_t rank = 0;
  for (int col = 0; col < n && rank < rows.size(); ++col) {
    std::size_t sel = rank;
    while (sel < rows.size() && rows[sel][col] == 0) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[rank], rows[sel]);
    const long inv = inverse_mod_p(rows[rank][col], p);
    for (int j = 0; j < n; ++j) rows[rank][j] = rows[rank][j] * inv % p;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == rank || rows[i][col] == 0) continue;
      const long f = rows[i][col];
      for (int j = 0; j < n; ++j) {
        rows[i][j] = mod_p(rows[i][j] - f * rows[rank][j], p);
      }
    }
    out.pivots.push_back(col);
    ++rank;
  }
  rows.resize(rank);
  out.rows = std::move(rows);
  return out;
}

// True iff row reduces to zero against the RREF (i.e. lies in its span).
bool in_row_space(const RrefResult& rref, std::vector<long> row, long p) {
  for (auto& v : row) v = mod_p(v, p);
  for (std::size_t i = 0; i < rref.rows.size(); ++i) {
    const long f = row[rref.pivots[i]];
    if (f == 0) continue;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = mod_p(row[j] - f * rref.rows[i][j], p);
    }
  }
  return std::all_of(row.begin(), row.end(), [](long v) { return v == 0; });
}

// Basis of {x in Z^n : x mod p in rowspace}: the lifted RREF rows plus
// p*e_j on the non-pivot coordinates. Determinant is p^(n - rank).
Eigen::MatrixXd construction_a_generator(const RrefResult& rref, long p, int n) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  std::vector<bool> is_pivot(n, false);
  for (std::size_t i = 0; i < rref.rows.size(); ++i) {
    is_pivot[rref.pivots[i]] = true;
    for (int j = 0; j < n; ++j) {
      g(j, rref.pivots[i]) = static_cast<double>(rref.rows[i][j]);
    }
  }
  // Column for RREF row i sits at its pivot position; note the transpose:
  // the row becomes a column vector.
  for (int j = 0; j < n; ++j) {
    if (!is_pivot[j]) g(j, j) = static_cast<double>(p);
  }
  return g;
}

std::uint64_t saturating_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    out *= base;
  }
  return out;
}

}  // namespace

const Lattice& LatticeChain::shaping(int level) const {
  if (level == 1) return coarse_;
  if (level == 2) return mid_;
  throw std::invalid_argument("chain level must be 1 or 2");
}

const LatticeChain::LevelIndexing& LatticeChain::indexing(int level) const {
  if (level == 1) return idx1_;
  if (level == 2) return idx2_;
  throw std::invalid_argument("chain level must be 1 or 2");
}

double LatticeChain::leader_count(int level) const {
  const auto& idx = indexing(level);
  return std::pow(static_cast<double>(idx.digit_base),
                  static_cast<double>(idx.digit_positions.size()));
}

std::uint64_t LatticeChain::enumerable_count(int level) const {
  const auto& idx = indexing(level);
  return saturating_pow(idx.digit_base, idx.digit_positions.size());
}

const std::vector<Eigen::VectorXd>& LatticeChain::leaders(
    int level, std::uint64_t cap) const {
  const std::uint64_t count = enumerable_count(level);
  if (count > cap) throw EnumerationCapError(count, cap);
  auto cache = (level == 1) ? cache1_ : cache2_;
  std::call_once(cache->once, [&] {
    const auto& idx = indexing(level);
    const Lattice& shape = shaping(level);
    const int n = dim();
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    std::vector<std::uint64_t> digits(idx.digit_positions.size(), 0);
    for (std::uint64_t o = 0; o < count; ++o) {
      for (std::size_t d = 0; d < digits.size(); ++d) {
        z(idx.digit_positions[d]) = static_cast<double>(digits[d]);
      }
      out.push_back(shape.mod(fine_.generator() * z));
      // odometer
      for (std::size_t d = 0; d < digits.size(); ++d) {
        if (++digits[d] < idx.digit_base) break;
        digits[d] = 0;
      }
    }
    const double eps = fine_.coord_tolerance();
    std::sort(out.begin(), out.end(),
              [eps](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                return detail::lex_less(a, b, eps);
              });
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (detail::approx_equal(out[i - 1], out[i], eps)) {
        throw std::logic_error("duplicate coset leader; tie rule broken");
      }
    }
    cache->leaders = std::move(out);
  });
  return cache->leaders;
}

std::size_t LatticeChain::leader_index(int level,
                                       const Eigen::VectorXd& v) const {
  const auto& set = leaders(level);
  const double eps = fine_.coord_tolerance();
  auto it = std::lower_bound(
      set.begin(), set.end(), v,
      [eps](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return detail::lex_less(a, b, eps);
      });
  if (it == set.end() || !detail::approx_equal(*it, v, eps)) {
    throw std::invalid_argument("vector is not a coset leader at this level");
  }
  return static_cast<std::size_t>(it - set.begin());
}

bool LatticeChain::is_leader(int level, const Eigen::VectorXd& v) const {
  const auto& set = leaders(level);
  const double eps = fine_.coord_tolerance();
  auto it = std::lower_bound(
      set.begin(), set.end(), v,
      [eps](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return detail::lex_less(a, b, eps);
      });
  return it != set.end() && detail::approx_equal(*it, v, eps);
}

Eigen::VectorXd LatticeChain::draw_leader(int level, CounterRng& rng) const {
  const auto& idx = indexing(level);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim());
  for (int pos : idx.digit_positions) {
    z(pos) = static_cast<double>(rng.next_index(idx.digit_base));
  }
  return shaping(level).mod(fine_.generator() * z);
}

SecondMomentEstimate LatticeChain::shaping_power(int level,
                                                 std::uint64_t mc_budget,
                                                 std::uint64_t seed) const {
  if (desc_.family == "construction-a") {
    const Lattice& shape = shaping(level);
    return shape.second_moment(
        shape.family() == LatticeFamily::ScaledCubic ? 0 : mc_budget, seed);
  }
  // Self-similar: estimate the mid lattice once and scale by k1^2 so the
  // two levels stay exactly consistent.
  SecondMomentEstimate est = mid_.second_moment(
      mid_.family() == LatticeFamily::ScaledCubic ? 0 : mc_budget, seed);
  if (level == 1) {
    const double f = static_cast<double>(k1_) * static_cast<double>(k1_);
    est.value *= f;
    est.standard_error *= f;
  }
  return est;
}

LatticeChain build_self_similar_chain(const Lattice& base, int k1, int k2,
                                      double scale,
                                      const std::string& base_name) {
  if (k1 < 1 || k2 < 1) throw std::invalid_argument("k1 and k2 must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  LatticeChain chain;
  chain.fine_ = base.scaled(scale);
  // Scale the already-scaled lattices by the integers so the coarser
  // generators are exact multiples of the fine one.
  chain.mid_ = chain.fine_.scaled(static_cast<double>(k2));
  chain.coarse_ = chain.mid_.scaled(static_cast<double>(k1));
  const int n = base.dim();
  chain.idx2_.digit_base = static_cast<std::uint64_t>(k2);
  chain.idx1_.digit_base = static_cast<std::uint64_t>(k1) * k2;
  for (int i = 0; i < n; ++i) {
    chain.idx1_.digit_positions.push_back(i);
    chain.idx2_.digit_positions.push_back(i);
  }
  chain.rate2_ = std::log2(static_cast<double>(k2));
  chain.rate1_ = std::log2(static_cast<double>(k1) * k2);
  chain.k1_ = k1;

  ChainDescription d;
  d.family = base.family() == LatticeFamily::ScaledCubic ? "scaled-cubic"
                                                         : "base-matrix";
  d.n = n;
  d.base = base_name;
  d.generator_row_major.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d.generator_row_major[static_cast<std::size_t>(i) * n + j] =
          base.generator()(i, j);
    }
  }
  d.k1 = k1;
  d.k2 = k2;
  d.scale = scale;
  chain.desc_ = std::move(d);
  return chain;
}

LatticeChain build_construction_a_chain(
    long p, int n, const std::vector<std::vector<long>>& g2,
    const std::vector<std::vector<long>>& g1) {
  if (!is_prime(p)) throw std::invalid_argument("p must be prime");
  if (n <= 0) throw std::invalid_argument("dimension must be positive");
  const RrefResult r2 = rref_mod_p(g2, p, n);
  const RrefResult r1 = rref_mod_p(g1, p, n);
  for (const auto& row : g1) {
    if (!in_row_space(r2, row, p)) {
      throw std::invalid_argument("g1 rows must lie in the row space of g2");
    }
  }
  auto make_level = [&](const RrefResult& r) {
    const int rank = static_cast<int>(r.rows.size());
    if (rank == 0) return Lattice::scaled_cubic(n, static_cast<double>(p));
    if (rank == n) return Lattice::scaled_cubic(n, 1.0);
    return Lattice::from_generator(construction_a_generator(r, p, n),
                                   LatticeFamily::ConstructionA);
  };
  LatticeChain chain;
  chain.fine_ = Lattice::scaled_cubic(n, 1.0);
  chain.mid_ = make_level(r2);
  chain.coarse_ = make_level(r1);
  auto fill_idx = [&](LatticeChain::LevelIndexing& idx, const RrefResult& r) {
    idx.digit_base = static_cast<std::uint64_t>(p);
    std::vector<bool> is_pivot(n, false);
    for (int c : r.pivots) is_pivot[c] = true;
    for (int j = 0; j < n; ++j) {
      if (!is_pivot[j]) idx.digit_positions.push_back(j);
    }
  };
  fill_idx(chain.idx1_, r1);
  fill_idx(chain.idx2_, r2);
  chain.rate1_ = static_cast<double>(n - static_cast<int>(r1.rows.size())) / n *
                 std::log2(static_cast<double>(p));
  chain.rate2_ = static_cast<double>(n - static_cast<int>(r2.rows.size())) / n *
                 std::log2(static_cast<double>(p));
  chain.k1_ = 1;

  ChainDescription d;
  d.family = "construction-a";
  d.n = n;
  d.p = p;
  d.g1 = g1;
  d.g2 = g2;
  chain.desc_ = std::move(d);
  return chain;
}

LatticeChain build_chain(const ChainDescription& desc) {
  if (desc.family == "construction-a") {
    return build_construction_a_chain(desc.p, desc.n, desc.g2, desc.g1);
  }
  Lattice base = Lattice::scaled_cubic(1, 1.0);
  if (desc.family == "scaled-cubic") {
    base = Lattice::scaled_cubic(desc.n, 1.0);
  } else if (desc.family == "base-matrix") {
    Eigen::MatrixXd g(desc.n, desc.n);
    if (desc.generator_row_major.size() !=
        static_cast<std::size_t>(desc.n) * desc.n) {
      if (!desc.base.empty()) {
        g = base_generator(desc.base, desc.n);
      } else {
        throw std::invalid_argument("base-matrix chain needs an n*n generator");
      }
    } else {
      for (int i = 0; i < desc.n; ++i) {
        for (int j = 0; j < desc.n; ++j) {
          g(i, j) =
              desc.generator_row_major[static_cast<std::size_t>(i) * desc.n + j];
        }
      }
    }
    base = Lattice::from_generator(g, LatticeFamily::BaseMatrix);
  } else {
    throw std::invalid_argument("unknown chain family: " + desc.family);
  }
  LatticeChain chain =
      build_self_similar_chain(base, desc.k1, desc.k2, desc.scale, desc.base);
  return chain;
}

const std::vector<Eigen::VectorXd>& enumerate_coset_leaders(
    const LatticeChain& chain, int level, std::uint64_t cap) {
  return chain.leaders(level, cap);
}

MatchedChain match_chain_to_powers(const Lattice& base, int k2, double p1,
                                   double p2, std::uint64_t mc_budget,
                                   std::uint64_t seed,
                                   const std::string& base_name) {
  if (!(p2 > 0.0) || !(p1 >= p2)) {
    throw std::invalid_argument("power matching requires p1 >= p2 > 0");
  }
  if (k2 < 1) throw std::invalid_argument("k2 must be >= 1");
  MatchedChain out;
  out.base_second_moment = base.second_moment(
      base.family() == LatticeFamily::ScaledCubic ? 0 : mc_budget, seed);
  const double scale = std::sqrt(p2 / out.base_second_moment.value) / k2;
  out.k1 = std::max<int>(1, static_cast<int>(std::llround(std::sqrt(p1 / p2))));
  out.chain = build_self_similar_chain(base, out.k1, k2, scale, base_name);
  out.p2_realized = p2;
  out.p1_realized = static_cast<double>(out.k1) * out.k1 * p2;
  return out;
}

void to_json(nlohmann::json& j, const ChainDescription& d) {
  j = nlohmann::json{{"family", d.family}, {"n", d.n}};
  if (d.family == "construction-a") {
    j["p"] = d.p;
    j["g1"] = d.g1;
    j["g2"] = d.g2;
  } else {
    j["base"] = d.base;
    j["generator"] = d.generator_row_major;
    j["k1"] = d.k1;
    j["k2"] = d.k2;
    j["scale"] = d.scale;
  }
}

void from_json(const nlohmann::json& j, ChainDescription& d) {
  d = ChainDescription{};
  d.family = j.at("family").get<std::string>();
  d.n = j.at("n").get<int>();
  if (d.family == "construction-a") {
    d.p = j.at("p").get<long>();
    d.g1 = j.at("g1").get<std::vector<std::vector<long>>>();
    d.g2 = j.at("g2").get<std::vector<std::vector<long>>>();
  } else {
    d.base = j.value("base", std::string{});
    d.generator_row_major = j.value("generator", std::vector<double>{});
    d.k1 = j.at("k1").get<int>();
    d.k2 = j.at("k2").get<int>();
    d.scale = j.at("scale").get<double>();
  }
}

}  // namespace trc
