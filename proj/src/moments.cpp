#include "smikm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "smikm/error.hpp"

namespace smikm {

namespace {

DoublePlane to_unit_double(const ImageBuf& gray) {
  if (gray.channels != 1) throw ChannelError("moments expect a single-channel image");
  DoublePlane p(gray.width, gray.height);
  for (size_t i = 0; i < p.v.size(); ++i) p.v[i] = gray.data[i] / 255.0;
  return p;
}

GeometricMoments moments_of(const DoublePlane& plane, int max_order) {
  GeometricMoments gm;
  gm.max_order = max_order;
  gm.m.assign(static_cast<size_t>(max_order + 1) * (max_order + 1), 0.0);
  std::vector<double> xp(max_order + 1), yp(max_order + 1);
  for (int y = 0; y < plane.height; ++y) {
    yp[0] = 1.0;
    for (int q = 1; q <= max_order; ++q) yp[q] = yp[q - 1] * y;
    for (int x = 0; x < plane.width; ++x) {
      const double f = plane.at(x, y);
      if (f == 0.0) continue;
      xp[0] = 1.0;
      for (int p = 1; p <= max_order; ++p) xp[p] = xp[p - 1] * x;
      for (int p = 0; p <= max_order; ++p)
        for (int q = 0; q <= max_order; ++q) gm.at(p, q) += xp[p] * yp[q] * f;
    }
  }
  return gm;
}

// w(x; p, N) = C(N,x) p^x (1-p)^(N-x), evaluated in the log domain.
double binomial_weight(int x, double p, int N) {
  const double lw = std::lgamma(N + 1.0) - std::lgamma(x + 1.0) - std::lgamma(N - x + 1.0) +
                    x * std::log(p) + (N - x) * std::log1p(-p);
  return std::exp(lw);
}

}  // namespace

double InvariantMomentContext::canonical_theta() const {
  return theta + frame_quarter_turns * std::numbers::pi / 2.0;
}

GeometricMoments geometric_moments(const ImageBuf& img, int max_order) {
  if (img.channels != 1) throw ChannelError("geometric_moments expects a single channel");
  DoublePlane p(img.width, img.height);
  for (size_t i = 0; i < p.v.size(); ++i) p.v[i] = img.data[i];
  return moments_of(p, max_order);
}

GeometricMoments geometric_moments(const DoublePlane& plane, int max_order) {
  return moments_of(plane, max_order);
}

InvariantMomentContext invariant_context(const ImageBuf& img) {
  const DoublePlane f = to_unit_double(img);
  InvariantMomentContext ctx;

  double m00 = 0.0, m10 = 0.0, m01 = 0.0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const double v = f.at(x, y);
      m00 += v;
      m10 += v * x;
      m01 += v * y;
    }
  if (m00 <= 0.0) throw DegenerateImage("invariant_context: zero-mass image");
  ctx.m00 = m00;
  ctx.x_c = m10 / m00;
  ctx.y_c = m01 / m00;

  // Central moments up to order 3.
  double mu[4][4] = {};
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const double v = f.at(x, y);
      if (v == 0.0) continue;
      const double dx = x - ctx.x_c;
      const double dy = y - ctx.y_c;
      double dxp = 1.0;
      for (int p = 0; p <= 3; ++p) {
        double dyq = 1.0;
        for (int q = 0; q <= 3; ++q) {
          mu[p][q] += v * dxp * dyq;
          dyq *= dy;
        }
        dxp *= dx;
      }
    }
  ctx.mu11 = mu[1][1];
  ctx.mu20 = mu[2][0];
  ctx.mu02 = mu[0][2];
  ctx.theta = 0.5 * std::atan2(2.0 * ctx.mu11, ctx.mu20 - ctx.mu02);

  // De-rotated third-order sums for each quarter-turn candidate; the frame
  // with the largest s30 + s03 is the canonical one (the candidate set is
  // identical for any 90-degree rotation of the content, so the pick is too).
  const double c0 = std::cos(ctx.theta);
  const double s0 = std::sin(ctx.theta);
  int best_k = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    // cos/sin of theta + k*pi/2 without re-evaluating trig.
    const double c = (k == 0) ? c0 : (k == 1) ? -s0 : (k == 2) ? -c0 : s0;
    const double s = (k == 0) ? s0 : (k == 1) ? c0 : (k == 2) ? -s0 : -c0;
    const double s30 = c * c * c * mu[3][0] + 3.0 * c * c * s * mu[2][1] +
                       3.0 * c * s * s * mu[1][2] + s * s * s * mu[0][3];
    const double s03 = -s * s * s * mu[3][0] + 3.0 * s * s * c * mu[2][1] -
                       3.0 * s * c * c * mu[1][2] + c * c * c * mu[0][3];
    const double score = s30 + s03;
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  ctx.frame_quarter_turns = best_k;

  const double ct = std::cos(ctx.canonical_theta());
  const double st = std::sin(ctx.canonical_theta());
  std::array<double, 16> sums{};
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const double v = f.at(x, y);
      if (v == 0.0) continue;
      const double dx = x - ctx.x_c;
      const double dy = y - ctx.y_c;
      const double u = ct * dx + st * dy;
      const double w = -st * dx + ct * dy;
      double up = 1.0;
      for (int p = 0; p <= 3; ++p) {
        double wq = 1.0;
        for (int q = 0; q <= 3; ++q) {
          sums[static_cast<size_t>(p) * 4 + q] += v * up * wq;
          wq *= w;
        }
        up *= u;
      }
    }
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; q <= 3; ++q)
      ctx.v[static_cast<size_t>(p) * 4 + q] =
          sums[static_cast<size_t>(p) * 4 + q] * std::pow(m00, -(p + q) / 2.0 - 1.0);
  return ctx;
}

double KrawtchoukBasis::eval_poly(int n, double x) const {
  double acc = 0.0;
  for (int k = max_order; k >= 0; --k) acc = acc * x + coeff_at(k, n);
  return acc;
}

KrawtchoukBasis krawtchouk_basis(int N, double p, int max_order) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("krawtchouk_basis: p must be in (0,1)");
  if (max_order < 0 || N < max_order)
    throw ParameterError("krawtchouk_basis: need N >= max_order >= 0");

  KrawtchoukBasis b;
  b.N = N;
  b.p = p;
  b.max_order = max_order;
  const int nc = max_order + 1;

  b.weight.resize(N + 1);
  for (int x = 0; x <= N; ++x) b.weight[x] = binomial_weight(x, p, N);

  b.rho.resize(nc);
  b.rho[0] = 1.0;
  for (int n = 1; n <= max_order; ++n)
    b.rho[n] = b.rho[n - 1] * ((1.0 - p) / p) * n / (N - n + 1.0);

  // Values by the three-term recurrence
  //   p(N-n) K_{n+1}(x) = (p(N-n) + n(1-p) - x) K_n(x) - n(1-p) K_{n-1}(x)
  std::vector<double> K(static_cast<size_t>(nc) * (N + 1));
  for (int x = 0; x <= N; ++x) {
    K[x] = 1.0;
    if (max_order >= 1) K[static_cast<size_t>(N + 1) + x] = 1.0 - x / (N * p);
  }
  for (int n = 1; n < max_order; ++n)
    for (int x = 0; x <= N; ++x) {
      const double a = p * (N - n);
      const double kn = K[static_cast<size_t>(n) * (N + 1) + x];
      const double km = K[static_cast<size_t>(n - 1) * (N + 1) + x];
      K[static_cast<size_t>(n + 1) * (N + 1) + x] =
          ((a + n * (1.0 - p) - x) * kn - n * (1.0 - p) * km) / a;
    }

  b.kbar.resize(K.size());
  for (int n = 0; n <= max_order; ++n) {
    const double inv_sqrt_rho = 1.0 / std::sqrt(b.rho[n]);
    for (int x = 0; x <= N; ++x)
      b.kbar[static_cast<size_t>(n) * (N + 1) + x] =
          K[static_cast<size_t>(n) * (N + 1) + x] * std::sqrt(b.weight[x]) * inv_sqrt_rho;
  }

  // The same recurrence applied to monomial coefficient vectors.
  b.coeff.assign(static_cast<size_t>(nc) * nc, 0.0);
  b.coeff[0] = 1.0;
  if (max_order >= 1) {
    b.coeff[static_cast<size_t>(nc)] = 1.0;
    b.coeff[static_cast<size_t>(nc) + 1] = -1.0 / (N * p);
  }
  for (int n = 1; n < max_order; ++n) {
    const double a = p * (N - n);
    for (int k = 0; k <= max_order; ++k) {
      const double cn = b.coeff[static_cast<size_t>(n) * nc + k];
      const double cn_shift = k > 0 ? b.coeff[static_cast<size_t>(n) * nc + k - 1] : 0.0;
      const double cm = b.coeff[static_cast<size_t>(n - 1) * nc + k];
      b.coeff[static_cast<size_t>(n + 1) * nc + k] =
          ((a + n * (1.0 - p)) * cn - cn_shift - n * (1.0 - p) * cm) / a;
    }
  }
  return b;
}

const KrawtchoukBasis& cached_basis(int N, double p, int max_order) {
  struct Key {
    int N;
    double p;
    int order;
    bool operator<(const Key& o) const {
      if (N != o.N) return N < o.N;
      if (p != o.p) return p < o.p;
      return order < o.order;
    }
  };
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<KrawtchoukBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[Key{N, p, max_order}];
  if (!slot) slot = std::make_unique<KrawtchoukBasis>(krawtchouk_basis(N, p, max_order));
  return *slot;
}

DoublePlane weighted_image(const ImageBuf& img, double p_x, double p_y) {
  if (!(p_x > 0.0 && p_x < 1.0 && p_y > 0.0 && p_y < 1.0))
    throw ParameterError("weighted_image: p_x, p_y must be in (0,1)");
  DoublePlane f = to_unit_double(img);
  const int N = img.width - 1;
  const int M = img.height - 1;
  std::vector<double> wx(img.width), wy(img.height);
  for (int x = 0; x <= N; ++x) wx[x] = binomial_weight(x, p_x, N);
  for (int y = 0; y <= M; ++y) wy[y] = binomial_weight(y, p_y, M);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) f.at(x, y) *= std::sqrt(wx[x] * wy[y]);
  return f;
}

std::vector<double> weighted_krawtchouk_moments(const ImageBuf& img, double p_x, double p_y,
                                                std::span<const std::pair<int, int>> orders) {
  if (!(p_x > 0.0 && p_x < 1.0 && p_y > 0.0 && p_y < 1.0))
    throw ParameterError("weighted_krawtchouk_moments: p_x, p_y must be in (0,1)");
  int max_n = 0, max_m = 0;
  for (auto [n, m] : orders) {
    max_n = std::max(max_n, n);
    max_m = std::max(max_m, m);
  }
  const int N = img.width - 1;
  const int M = img.height - 1;
  const KrawtchoukBasis bx = krawtchouk_basis(N, p_x, std::min(max_n, N));
  const KrawtchoukBasis by = krawtchouk_basis(M, p_y, std::min(max_m, M));
  if (max_n > N || max_m > M)
    throw ParameterError("weighted_krawtchouk_moments: order exceeds image extent");

  // Geometric moments of the fully weighted image w(x) w(y) f(x,y); together
  // with the sqrt weight inside kbar this reproduces the direct double sum
  // of f~ against the weighted polynomial pair.
  DoublePlane g = to_unit_double(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) g.at(x, y) *= bx.weight[x] * by.weight[y];
  const GeometricMoments gm = moments_of(g, std::max(max_n, max_m));

  std::vector<double> out;
  out.reserve(orders.size());
  for (auto [n, m] : orders) {
    double acc = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= m; ++j) acc += bx.coeff_at(i, n) * by.coeff_at(j, m) * gm.at(i, j);
    out.push_back(acc / std::sqrt(bx.rho[n] * by.rho[m]));
  }
  return out;
}

IkmDescriptor ikm_descriptor(const ImageBuf& patch,
                             std::span<const std::pair<double, double>> order_pairs,
                             int canonical_domain) {
  if (canonical_domain < 3) throw ParameterError("ikm_descriptor: domain too small");
  const InvariantMomentContext ctx = invariant_context(patch);

  // Re-embed the invariant moments at the center of the fixed polynomial
  // domain at a canonical scale: nu_ij are the geometric moments of the
  // unit-mass canonicalized patch. A domain tied to the input size would
  // leak the raster scale back into the descriptor.
  const double center = canonical_domain / 2.0;
  const double lambda = canonical_domain / 4.0;
  constexpr double binom[4][4] = {
      {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  double nu[4][4];
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; j <= 3; ++j) {
      double acc = 0.0;
      for (int p = 0; p <= i; ++p)
        for (int q = 0; q <= j; ++q)
          acc += binom[i][p] * binom[j][q] * std::pow(lambda, p + q) *
                 std::pow(center, (i - p) + (j - q)) * ctx.v_at(p, q);
      nu[i][j] = acc;
    }

  IkmDescriptor d;
  d.order_pairs.assign(order_pairs.begin(), order_pairs.end());
  d.values.reserve(order_pairs.size() * kIkmOrders.size());
  for (auto [p_x, p_y] : order_pairs) {
    const KrawtchoukBasis& bx = cached_basis(canonical_domain, p_x, 3);
    const KrawtchoukBasis& by = cached_basis(canonical_domain, p_y, 3);
    for (auto [n, m] : kIkmOrders) {
      double acc = 0.0;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) acc += bx.coeff_at(i, n) * by.coeff_at(j, m) * nu[i][j];
      d.values.push_back(acc / std::sqrt(bx.rho[n] * by.rho[m]));
    }
  }
  return d;
}

}  // namespace smikm
