#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "smikm/image.hpp"
#include "smikm/plane.hpp"

namespace smikm {

inline constexpr int kDefaultPatchSide = 30;

// m_pq = sum_x sum_y x^p y^q f(x,y), 0-based coordinates, x = column.
// Stored as a full (max_order+1)^2 grid.
struct GeometricMoments {
  int max_order = 0;
  std::vector<double> m;

  double at(int p, int q) const { return m[static_cast<size_t>(p) * (max_order + 1) + q]; }
  double& at(int p, int q) { return m[static_cast<size_t>(p) * (max_order + 1) + q]; }
};

// Centroid, principal-axis angle and the normalized central moments v_pq
// (translation/rotation/scale invariant) of an intensity patch.
//
// theta is the principal-value angle from atan2(2*mu11, mu20 - mu02)/2; the
// rotation frame actually used for v is theta + frame_quarter_turns * pi/2,
// with the quarter turn chosen so that the de-rotated third-order moments
// are sign-canonical. Without that choice the odd-order v_pq flip sign under
// 180-degree rotations and swap under 90-degree ones.
struct InvariantMomentContext {
  double x_c = 0.0, y_c = 0.0;
  double mu11 = 0.0, mu20 = 0.0, mu02 = 0.0;
  double theta = 0.0;
  int frame_quarter_turns = 0;
  double m00 = 0.0;  // mass of the unit-scaled ([0,1]) intensity plane

  static constexpr int kOrder = 3;
  std::array<double, (kOrder + 1) * (kOrder + 1)> v{};

  double v_at(int p, int q) const { return v[static_cast<size_t>(p) * (kOrder + 1) + q]; }
  double canonical_theta() const;
};

// Krawtchouk polynomials K_n(x; p, N) on x in {0..N} with their binomial
// weight w, norms rho, weighted values kbar = K * sqrt(w/rho) and monomial
// coefficient table a (coeff_at(k, n) = coefficient of x^k in K_n).
struct KrawtchoukBasis {
  int N = 0;
  double p = 0.5;
  int max_order = 0;
  std::vector<double> kbar;    // (max_order+1) rows of (N+1) values
  std::vector<double> coeff;   // (max_order+1) x (max_order+1), row n
  std::vector<double> rho;     // max_order+1
  std::vector<double> weight;  // N+1

  double kbar_at(int n, int x) const { return kbar[static_cast<size_t>(n) * (N + 1) + x]; }
  double coeff_at(int k, int n) const {
    return coeff[static_cast<size_t>(n) * (max_order + 1) + k];
  }
  // Evaluate the classic (unweighted) polynomial at arbitrary real x.
  double eval_poly(int n, double x) const;
};

// Invariant Krawtchouk moment vector of a patch: 6 values per (p_x, p_y)
// pair, pairs concatenated in the order given.
struct IkmDescriptor {
  std::vector<double> values;
  std::vector<std::pair<double, double>> order_pairs;

  size_t dim() const { return values.size(); }
};

// The six (n, m) orders that survive once the constant ones are dropped.
inline constexpr std::array<std::pair<int, int>, 6> kIkmOrders{
    {{0, 2}, {2, 0}, {1, 2}, {2, 1}, {3, 0}, {0, 3}}};

inline constexpr std::array<std::pair<double, double>, 1> kSingleOrderPairs{{{0.5, 0.5}}};

// Five focus zones: upper-left, upper-right, center, lower-left, lower-right.
inline constexpr std::array<std::pair<double, double>, 5> kMultiOrderPairs{
    {{0.25, 0.25}, {0.25, 0.75}, {0.5, 0.5}, {0.75, 0.25}, {0.75, 0.75}}};

GeometricMoments geometric_moments(const ImageBuf& img, int max_order);
GeometricMoments geometric_moments(const DoublePlane& plane, int max_order);

// Throws DegenerateImage when the patch has zero mass.
InvariantMomentContext invariant_context(const ImageBuf& img);

// Throws ParameterError unless p in (0,1) and N >= max_order >= 0.
KrawtchoukBasis krawtchouk_basis(int N, double p, int max_order);

// Shared, lazily built basis cache (bases are immutable once built).
const KrawtchoukBasis& cached_basis(int N, double p, int max_order);

// f~(x,y) = sqrt(w(x; p_x, W-1) * w(y; p_y, H-1)) * f(x,y) with f in [0,1].
DoublePlane weighted_image(const ImageBuf& img, double p_x, double p_y);

// Weighted Krawtchouk moments Q_nm of the image, computed through the
// geometric-moment expansion; equals the direct sum of f~ against the
// weighted polynomial pair.
std::vector<double> weighted_krawtchouk_moments(const ImageBuf& img, double p_x, double p_y,
                                                std::span<const std::pair<int, int>> orders);

// Invariant Krawtchouk descriptor. The patch content is reduced to the
// invariant moments v_pq, re-embedded at the center of a fixed polynomial
// domain {0..canonical_domain} at a canonical scale, and projected onto the
// six surviving orders for every (p_x, p_y) pair.
IkmDescriptor ikm_descriptor(const ImageBuf& patch,
                             std::span<const std::pair<double, double>> order_pairs,
                             int canonical_domain = kDefaultPatchSide - 1);

}  // namespace smikm
