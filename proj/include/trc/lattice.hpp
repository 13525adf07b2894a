#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "trc/rng.hpp"

namespace trc {

enum class LatticeFamily { ScaledCubic, BaseMatrix, ConstructionA };

std::string family_name(LatticeFamily f);
LatticeFamily family_from_name(const std::string& name);

// Second moment per dimension of the Voronoi region, either closed-form or
// estimated by Monte Carlo (uniform draw in a fundamental parallelepiped,
// reduced mod the lattice).
struct SecondMomentEstimate {
  double value = 0.0;  // variance per dimension
  enum class Method { ClosedForm, MonteCarlo } method = Method::ClosedForm;
  std::uint64_t sample_count = 0;  // 0 for closed form
  double standard_error = 0.0;     // 0 for closed form
};

// An n-dimensional lattice {G z : z integer}, with the generator held
// column-wise. Supports exact nearest-point quantization, mod reduction,
// volume and second moments.
//
// Tie-breaking: when a point is equidistant from several lattice points, the
// quantizer returns the candidate whose residual x - lambda is
// lexicographically smallest (equivalently, the lex-largest lattice point).
// For scaled-cubic lattices this is round-half-up per coordinate, so e.g.
// 3.0 mod 2Z = -1.0 and the coset leaders of Z mod 4Z are {-2,-1,0,1}.
class Lattice {
 public:
  // a * Z^n; quantization and moments are closed-form.
  static Lattice scaled_cubic(int n, double a);

  // General full-rank generator (columns are basis vectors). Quantization
  // uses an exact sphere-decoding search seeded by Babai rounding.
  static Lattice from_generator(const Eigen::MatrixXd& generator,
                                LatticeFamily family = LatticeFamily::BaseMatrix);

  int dim() const { return n_; }
  LatticeFamily family() const { return family_; }
  const Eigen::MatrixXd& generator() const { return gen_; }
  double cubic_step() const { return cubic_step_; }

  // |det G|, exactly the volume of the fundamental (Voronoi) region.
  double volume() const { return volume_; }

  // Nearest lattice point in Euclidean norm (deterministic ties, see above).
  Eigen::VectorXd quantize(const Eigen::VectorXd& x) const;

  // Integer coordinates z of the nearest lattice point, i.e. quantize = G z.
  Eigen::VectorXd quantize_coeffs(const Eigen::VectorXd& x) const;

  // x - quantize(x); lies in the fundamental Voronoi region.
  Eigen::VectorXd mod(const Eigen::VectorXd& x) const;

  // budget == 0 forces closed form (throws if unavailable). Monte Carlo
  // draws are keyed per sample, so the result depends only on (seed, budget).
  SecondMomentEstimate second_moment(std::uint64_t budget,
                                     std::uint64_t seed = 0) const;

  // c * Lambda (same family).
  Lattice scaled(double c) const;

  // Absolute tolerance for "is a lattice point / same point" comparisons,
  // 1e-9 at unit volume, scale-covariant.
  double coord_tolerance() const { return coord_tol_; }

 private:
  Lattice() = default;
  void finalize();
  void search(const Eigen::VectorXd& x, Eigen::VectorXd& z_out) const;

  int n_ = 0;
  LatticeFamily family_ = LatticeFamily::BaseMatrix;
  double cubic_step_ = 0.0;  // a for scaled-cubic, else 0
  Eigen::MatrixXd gen_;      // columns are basis vectors
  double volume_ = 0.0;
  double coord_tol_ = 0.0;
  double tie_tol2_ = 0.0;  // squared-distance tie window for the search
  // Precomputed for the sphere decoder: gen_ = Q R with positive diag(R).
  Eigen::MatrixXd qt_;  // Q transpose
  Eigen::MatrixXd r_;
};

// Generators for the named base lattices used throughout: "z" (any n),
// "a2" (hexagonal), "d4" (checkerboard), "e8" (Gosset).
Eigen::MatrixXd base_generator(const std::string& name, int n);

namespace detail {
// Lexicographic comparison with a coordinate tolerance. Valid for sets of
// well-separated points (e.g. distinct lattice points), where every
// coordinate pair is either equal up to roundoff or macroscopically apart.
bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double eps);
bool approx_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double eps);
}  // namespace detail

}  // namespace trc
