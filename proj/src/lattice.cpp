#include "trc/lattice.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace trc {

std::string family_name(LatticeFamily f) {
  switch (f) {
    case LatticeFamily::ScaledCubic: return "scaled-cubic";
    case LatticeFamily::BaseMatrix: return "base-matrix";
    case LatticeFamily::ConstructionA: return "construction-a";
  }
  return "?";
}

LatticeFamily family_from_name(const std::string& name) {
  if (name == "scaled-cubic") return LatticeFamily::ScaledCubic;
  if (name == "base-matrix") return LatticeFamily::BaseMatrix;
  if (name == "construction-a") return LatticeFamily::ConstructionA;
  throw std::invalid_argument("unknown lattice family: " + name);
}

namespace detail {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double eps) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = a(i) - b(i);
    if (d < -eps) return true;
    if (d > eps) return false;
  }
  return false;
}

bool approx_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double eps) {
  if (a.size() != b.size()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= eps;
}

}  // namespace detail

Lattice Lattice::scaled_cubic(int n, double a) {
  if (n <= 0) throw std::invalid_argument("lattice dimension must be positive");
  if (!(a > 0.0)) throw std::invalid_argument("cubic step must be positive");
  Lattice lat;
  lat.n_ = n;
  lat.family_ = LatticeFamily::ScaledCubic;
  lat.cubic_step_ = a;
  lat.gen_ = a * Eigen::MatrixXd::Identity(n, n);
  lat.finalize();
  return lat;
}

Lattice Lattice::from_generator(const Eigen::MatrixXd& generator,
                                LatticeFamily family) {
  if (generator.rows() != generator.cols() || generator.rows() == 0) {
    throw std::invalid_argument("generator must be a nonempty square matrix");
  }
  Lattice lat;
  lat.n_ = static_cast<int>(generator.rows());
  lat.family_ = family;
  lat.gen_ = generator;
  lat.finalize();
  return lat;
}

void Lattice::finalize() {
  volume_ = std::abs(gen_.partialPivLu().determinant());
  const double unit = std::pow(volume_, 1.0 / n_);
  if (!(volume_ > 0.0) || !std::isfinite(volume_) ||
      unit < 1e-12 * gen_.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("generator is singular or too ill-conditioned");
  }
  coord_tol_ = 1e-9 * unit;
  tie_tol2_ = 1e-9 * unit * unit;
  if (family_ != LatticeFamily::ScaledCubic) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gen_);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Flip signs so diag(R) > 0; keeps the search arithmetic uniform.
    for (int i = 0; i < n_; ++i) {
      if (r(i, i) < 0) {
        r.row(i) = -r.row(i);
        q.col(i) = -q.col(i);
      }
    }
    qt_ = q.transpose();
    r_ = r;
  }
}

namespace {

// Round-half-up: the scalar version of the residual-lex-min tie rule.
inline double round_half_up(double z) { return std::floor(z + 0.5); }

struct SearchAcc {
  double best2 = std::numeric_limits<double>::infinity();
  double tie_tol2 = 0.0;
  std::vector<std::pair<double, Eigen::VectorXd>> candidates;  // (dist2, z)

  double limit() const {
    return best2 == std::numeric_limits<double>::infinity()
               ? best2
               : best2 + tie_tol2;
  }

  void offer(const Eigen::VectorXd& z, double dist2) {
    if (dist2 < best2) {
      best2 = dist2;
      std::erase_if(candidates,
                    [&](const auto& c) { return c.first > best2 + tie_tol2; });
    }
    candidates.emplace_back(dist2, z);
  }
};

// Depth-first Schnorr-Euchner enumeration over z, dimensions handled from
// n-1 down to 0. The first leaf visited is exactly the Babai nearest-plane
// point, which initializes the search radius.
void se_recurse(const Eigen::MatrixXd& r, const Eigen::VectorXd& y, int k,
                double dist2, Eigen::VectorXd& z, SearchAcc& acc) {
  if (k < 0) {
    acc.offer(z, dist2);
    return;
  }
  const double rkk = r(k, k);
  double proj = y(k);
  const int n = static_cast<int>(y.size());
  for (int j = k + 1; j < n; ++j) proj -= r(k, j) * z(j);
  const double center = proj / rkk;
  double u = round_half_up(center);
  // Zig-zag from the nearest integer outward; candidates come out ordered
  // by |center - u|, so the first bound violation ends the level.
  double delta = (center - u) >= 0 ? 1.0 : -1.0;
  for (;;) {
    const double d = (center - u) * rkk;
    const double add = d * d;
    if (dist2 + add > acc.limit()) break;
    z(k) = u;
    se_recurse(r, y, k - 1, dist2 + add, z, acc);
    u += delta;
    delta = -delta - (delta > 0 ? 1.0 : -1.0);
  }
}

}  // namespace

void Lattice::search(const Eigen::VectorXd& x, Eigen::VectorXd& z_out) const {
  SearchAcc acc;
  acc.tie_tol2 = tie_tol2_;
  Eigen::VectorXd y = qt_ * x;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n_);
  se_recurse(r_, y, n_ - 1, 0.0, z, acc);
  // Resolve ties: lex-smallest residual == lex-largest lattice point.
  const double eps = coord_tol_;
  Eigen::VectorXd best_z;
  Eigen::VectorXd best_point;
  for (const auto& [d2, cand] : acc.candidates) {
    if (d2 > acc.best2 + tie_tol2_) continue;
    Eigen::VectorXd point = gen_ * cand;
    if (best_z.size() == 0 || detail::lex_less(best_point, point, eps)) {
      best_z = cand;
      best_point = std::move(point);
    }
  }
  z_out = best_z;
}

Eigen::VectorXd Lattice::quantize_coeffs(const Eigen::VectorXd& x) const {
  if (x.size() != n_) {
    throw std::invalid_argument("quantize: input has wrong dimension");
  }
  if (family_ == LatticeFamily::ScaledCubic) {
    Eigen::VectorXd z(n_);
    for (int i = 0; i < n_; ++i) z(i) = round_half_up(x(i) / cubic_step_);
    return z;
  }
  Eigen::VectorXd z;
  search(x, z);
  return z;
}

Eigen::VectorXd Lattice::quantize(const Eigen::VectorXd& x) const {
  if (family_ == LatticeFamily::ScaledCubic) {
    return cubic_step_ * quantize_coeffs(x);
  }
  return gen_ * quantize_coeffs(x);
}

Eigen::VectorXd Lattice::mod(const Eigen::VectorXd& x) const {
  return x - quantize(x);
}

SecondMomentEstimate Lattice::second_moment(std::uint64_t budget,
                                            std::uint64_t seed) const {
  if (family_ == LatticeFamily::ScaledCubic) {
    SecondMomentEstimate est;
    est.value = cubic_step_ * cubic_step_ / 12.0;
    est.method = SecondMomentEstimate::Method::ClosedForm;
    return est;
  }
  if (budget == 0) {
    throw std::invalid_argument(
        "second_moment: no closed form for this family; a Monte Carlo budget "
        "is required");
  }
  // Uniform in the fundamental parallelepiped G [0,1)^n, reduced mod the
  // lattice, is uniform on the Voronoi region. Welford accumulation of the
  // per-sample statistic ||v||^2 / n.
  double mean = 0.0;
  double m2 = 0.0;
  Eigen::VectorXd u(n_);
  for (std::uint64_t i = 0; i < budget; ++i) {
    CounterRng rng(seed, Stream::SecondMoment, i);
    for (int j = 0; j < n_; ++j) u(j) = rng.next_unit();
    const Eigen::VectorXd v = mod(gen_ * u);
    const double s = v.squaredNorm() / n_;
    const double d = s - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (s - mean);
  }
  SecondMomentEstimate est;
  est.value = mean;
  est.method = SecondMomentEstimate::Method::MonteCarlo;
  est.sample_count = budget;
  if (budget > 1) {
    est.standard_error =
        std::sqrt(m2 / static_cast<double>(budget - 1) /
                  static_cast<double>(budget));
  }
  return est;
}

Lattice Lattice::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("scale must be positive");
  if (family_ == LatticeFamily::ScaledCubic) {
    return scaled_cubic(n_, c * cubic_step_);
  }
  return from_generator(c * gen_, family_);
}

Eigen::MatrixXd base_generator(const std::string& name, int n) {
  if (name == "z" || name == "Z") {
    if (n <= 0) throw std::invalid_argument("base z requires n >= 1");
    return Eigen::MatrixXd::Identity(n, n);
  }
  if (name == "a2" || name == "A2") {
    Eigen::MatrixXd g(2, 2);
    // Hexagonal lattice, basis columns (1,0) and (1/2, sqrt(3)/2).
    g << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    return g;
  }
  if (name == "d4" || name == "D4") {
    Eigen::MatrixXd g(4, 4);
    g << -1, 1, 0, 0,
         -1, -1, 1, 0,
          0, 0, -1, 1,
          0, 0, 0, -1;
    return g;
  }
  if (name == "e8" || name == "E8") {
    Eigen::MatrixXd g(8, 8);
    g << 2, -1, 0, 0, 0, 0, 0, 0.5,
         0, 1, -1, 0, 0, 0, 0, 0.5,
         0, 0, 1, -1, 0, 0, 0, 0.5,
         0, 0, 0, 1, -1, 0, 0, 0.5,
         0, 0, 0, 0, 1, -1, 0, 0.5,
         0, 0, 0, 0, 0, 1, -1, 0.5,
         0, 0, 0, 0, 0, 0, 1, 0.5,
         0, 0, 0, 0, 0, 0, 0, 0.5;
    return g;
  }
  throw std::invalid_argument("unknown base lattice: " + name);
}

}  // namespace trc
