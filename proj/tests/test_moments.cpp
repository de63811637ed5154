#include <doctest.h>

#include <cmath>
#include <random>

#include "smikm/error.hpp"
#include "smikm/moments.hpp"
#include "testutil.hpp"

using namespace smikm;

namespace {

// Independent evaluation of the hypergeometric series
//   K_n(x; p, N) = sum_k (-n)_k (-x)_k / (-N)_k * (1/p)^k / k!
double hypergeometric_kraw(int n, double x, double p, int N) {
  double acc = 0.0;
  double poch_n = 1.0, poch_x = 1.0, poch_N = 1.0, fact = 1.0, zk = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      poch_n *= -n + (k - 1);
      poch_x *= -x + (k - 1);
      poch_N *= -N + (k - 1);
      fact *= k;
      zk /= p;
    }
    acc += poch_n * poch_x / poch_N * zk / fact;
  }
  return acc;
}

ImageBuf tiny_2x2() {
  // row-major [[1,2],[3,4]]
  ImageBuf img(2, 2, 1);
  img.data = {1, 2, 3, 4};
  return img;
}

}  // namespace

TEST_CASE("geometric moments by direct summation") {
  const GeometricMoments gm = geometric_moments(tiny_2x2(), 2);
  CHECK(gm.at(0, 0) == doctest::Approx(10.0));
  // m10 sums x * f: the x=1 column holds 2 and 4
  CHECK(gm.at(1, 0) == doctest::Approx(2.0 + 4.0));
  CHECK(gm.at(0, 1) == doctest::Approx(3.0 + 4.0));

  ImageBuf zero(4, 4, 1);
  const GeometricMoments z = geometric_moments(zero, 3);
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; q <= 3; ++q) CHECK(z.at(p, q) == 0.0);

  ImageBuf origin(3, 3, 1);
  origin.at(0, 0) = 255;
  const GeometricMoments o = geometric_moments(origin, 2);
  CHECK(o.at(0, 0) == doctest::Approx(255.0));
  CHECK(o.at(1, 0) == 0.0);
  CHECK(o.at(0, 1) == 0.0);
}

TEST_CASE("krawtchouk basis anchors") {
  const KrawtchoukBasis b = krawtchouk_basis(4, 0.5, 3);
  for (int x = 0; x <= 4; ++x) CHECK(b.eval_poly(0, x) == doctest::Approx(1.0));
  CHECK(b.eval_poly(1, 0.0) == doctest::Approx(1.0));
  CHECK(b.eval_poly(1, 2.0) == doctest::Approx(0.0));  // 1 - 2/(4*0.5)
  CHECK(b.rho[0] == doctest::Approx(1.0));

  const KrawtchoukBasis b2 = krawtchouk_basis(10, 0.3, 2);
  CHECK(b2.weight[0] == doctest::Approx(std::pow(0.7, 10)));
  double wsum = 0.0;
  for (double w : b2.weight) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(krawtchouk_basis(10, 0.0, 2), ParameterError);
  CHECK_THROWS_AS(krawtchouk_basis(10, 1.0, 2), ParameterError);
  CHECK_THROWS_AS(krawtchouk_basis(2, 0.5, 3), ParameterError);
}

TEST_CASE("recurrence matches the hypergeometric series for n <= 3") {
  for (const int N : {7, 15, 29}) {
    for (const double p : {0.25, 0.5, 0.75}) {
      const KrawtchoukBasis b = krawtchouk_basis(N, p, 3);
      for (int n = 0; n <= 3; ++n)
        for (int x = 0; x <= N; ++x) {
          const double ref = hypergeometric_kraw(n, x, p, N);
          CHECK(b.eval_poly(n, x) == doctest::Approx(ref).epsilon(1e-9));
          // and the tabulated weighted values agree with the definition
          const double kb = ref * std::sqrt(b.weight[x] / b.rho[n]);
          CHECK(b.kbar_at(n, x) == doctest::Approx(kb).epsilon(1e-9));
        }
    }
  }
}

TEST_CASE("weighted polynomials are orthonormal") {
  for (const int N : {5, 16, 29, 47, 64}) {
    for (const double p : {0.25, 0.5, 0.75}) {
      const int order = std::min(5, N);
      const KrawtchoukBasis b = krawtchouk_basis(N, p, order);
      for (int n = 0; n <= order; ++n)
        for (int m = n; m <= order; ++m) {
          double acc = 0.0;
          for (int x = 0; x <= N; ++x) acc += b.kbar_at(n, x) * b.kbar_at(m, x);
          CHECK(std::abs(acc - (n == m ? 1.0 : 0.0)) < 1e-8);
        }
    }
  }
}

TEST_CASE("weighted_image focuses where (p_x, p_y) says") {
  const ImageBuf flat = tu::solid_gray(32, 32, 200);
  const DoublePlane mid = weighted_image(flat, 0.5, 0.5);
  int ax = 0, ay = 0;
  double best = -1.0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if (mid.at(x, y) > best) {
        best = mid.at(x, y);
        ax = x;
        ay = y;
      }
  CHECK(ax >= 15);
  CHECK(ax <= 16);
  CHECK(ay >= 15);
  CHECK(ay <= 16);

  const DoublePlane corner = weighted_image(flat, 0.25, 0.25);
  int bx = 0, by = 0;
  best = -1.0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if (corner.at(x, y) > best) {
        best = corner.at(x, y);
        bx = x;
        by = y;
      }
  CHECK(bx < ax);
  CHECK(by < ay);

  const DoublePlane z = weighted_image(ImageBuf(8, 8, 1), 0.5, 0.5);
  for (double v : z.v) CHECK(v == 0.0);

  CHECK_THROWS_AS(weighted_image(flat, 0.0, 0.5), ParameterError);
}

TEST_CASE("moment expansion equals the direct weighted sum") {
  // Oracle: Q_nm as an explicit double sum of the sqrt-weighted image
  // against the weighted polynomial pair.
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageBuf patch = tu::random_gray(30, 30, rng());
    for (const double p : {0.25, 0.5, 0.75}) {
      const auto vals =
          weighted_krawtchouk_moments(patch, p, p, {kIkmOrders.data(), kIkmOrders.size()});
      const DoublePlane ft = weighted_image(patch, p, p);
      const KrawtchoukBasis bx = krawtchouk_basis(29, p, 3);
      for (size_t oi = 0; oi < kIkmOrders.size(); ++oi) {
        const auto [n, m] = kIkmOrders[oi];
        double direct = 0.0;
        for (int y = 0; y < 30; ++y)
          for (int x = 0; x < 30; ++x) direct += ft.at(x, y) * bx.kbar_at(n, x) * bx.kbar_at(m, y);
        CHECK(tu::rel_diff(vals[oi], direct) < 1e-6);
      }
    }
  }
}

TEST_CASE("constant content along one axis kills the cross orders") {
  // f(x, y) = g(x): orthogonality against the constant polynomial zeroes
  // every order with m > 0.
  ImageBuf img(16, 16, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) img.at(x, y) = static_cast<std::uint8_t>(20 + 13 * x);
  const std::array<std::pair<int, int>, 3> orders{{{0, 1}, {0, 2}, {2, 3}}};
  const auto vals = weighted_krawtchouk_moments(img, 0.5, 0.5, {orders.data(), orders.size()});
  for (double v : vals) CHECK(std::abs(v) < 1e-10);

  const auto z = weighted_krawtchouk_moments(ImageBuf(12, 12, 1), 0.5, 0.5,
                                             {kIkmOrders.data(), kIkmOrders.size()});
  for (double v : z) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("invariant context basics") {
  // centered symmetric square
  ImageBuf img(33, 33, 1);
  for (int y = 12; y <= 20; ++y)
    for (int x = 12; x <= 20; ++x) img.at(x, y) = 255;
  const InvariantMomentContext ctx = invariant_context(img);
  CHECK(ctx.x_c == doctest::Approx(16.0));
  CHECK(ctx.y_c == doctest::Approx(16.0));
  CHECK(ctx.theta == doctest::Approx(0.0));
  CHECK(ctx.v_at(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(ctx.v_at(1, 0)) < 1e-12);
  CHECK(std::abs(ctx.v_at(0, 1)) < 1e-12);

  CHECK_THROWS_AS(invariant_context(ImageBuf(8, 8, 1)), DegenerateImage);
}

TEST_CASE("invariant moments ignore translation") {
  const ImageBuf a = tu::blob_canvas(64, 77, 8, 5);
  const ImageBuf b = tu::blob_canvas(64, 77, 13, 8);
  const InvariantMomentContext ca = invariant_context(a);
  const InvariantMomentContext cb = invariant_context(b);
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; q <= 3; ++q)
      CHECK(ca.v_at(p, q) == doctest::Approx(cb.v_at(p, q)).epsilon(1e-6));
}

TEST_CASE("ikm descriptor lengths follow the order pairs") {
  const ImageBuf patch = tu::random_gray(30, 30, 5);
  const IkmDescriptor single =
      ikm_descriptor(patch, {kSingleOrderPairs.data(), kSingleOrderPairs.size()});
  CHECK(single.values.size() == 6);
  const IkmDescriptor multi =
      ikm_descriptor(patch, {kMultiOrderPairs.data(), kMultiOrderPairs.size()});
  CHECK(multi.values.size() == 30);
  for (double v : multi.values) CHECK(std::isfinite(v));

  CHECK_THROWS_AS(
      ikm_descriptor(ImageBuf(30, 30, 1), {kSingleOrderPairs.data(), kSingleOrderPairs.size()}),
      DegenerateImage);
}

TEST_CASE("ikm expansion matches direct canonical evaluation") {
  // The binomial-shift algebra must agree with evaluating the polynomials at
  // the canonicalized coordinates directly.
  const int domain = 29;
  const ImageBuf patch = tu::random_gray(31, 31, 404);
  const InvariantMomentContext ctx = invariant_context(patch);
  const double center = domain / 2.0;
  const double lambda = domain / 4.0;
  const double ct = std::cos(ctx.canonical_theta());
  const double st = std::sin(ctx.canonical_theta());

  const IkmDescriptor d =
      ikm_descriptor(patch, {kSingleOrderPairs.data(), kSingleOrderPairs.size()}, domain);
  const KrawtchoukBasis b = krawtchouk_basis(domain, 0.5, 3);

  for (size_t oi = 0; oi < kIkmOrders.size(); ++oi) {
    const auto [n, m] = kIkmOrders[oi];
    double acc = 0.0;
    for (int y = 0; y < patch.height; ++y)
      for (int x = 0; x < patch.width; ++x) {
        const double f = patch.at(x, y) / 255.0;
        if (f == 0.0) continue;
        const double dx = x - ctx.x_c;
        const double dy = y - ctx.y_c;
        const double u = (ct * dx + st * dy) / std::sqrt(ctx.m00);
        const double v = (-st * dx + ct * dy) / std::sqrt(ctx.m00);
        acc += f / ctx.m00 * b.eval_poly(n, center + lambda * u) *
               b.eval_poly(m, center + lambda * v);
      }
    acc /= std::sqrt(b.rho[n] * b.rho[m]);
    CHECK(tu::rel_diff(d.values[oi], acc) < 1e-9);
  }
}

TEST_CASE("ikm descriptor survives exact rotations, translation, upscale") {
  const ImageBuf base = tu::blob_canvas(64, 909, 10, 14);
  const IkmDescriptor ref =
      ikm_descriptor(base, {kMultiOrderPairs.data(), kMultiOrderPairs.size()});

  auto check_close = [&](const ImageBuf& img, double tol) {
    const IkmDescriptor d =
        ikm_descriptor(img, {kMultiOrderPairs.data(), kMultiOrderPairs.size()});
    REQUIRE(d.values.size() == ref.values.size());
    for (size_t i = 0; i < d.values.size(); ++i)
      CHECK(tu::rel_diff(ref.values[i], d.values[i]) < tol);
  };

  check_close(tu::blob_canvas(64, 909, 16, 9), 1e-4);  // translation
  check_close(tu::rot90(base), 0.05);
  check_close(tu::rot180(base), 0.05);
  check_close(tu::rot270(base), 0.05);
  check_close(tu::upscale2x(base), 0.05);
}

TEST_CASE("rotating a textured patch by 90 degrees keeps the descriptor") {
  const ImageBuf patch = tu::random_gray(31, 31, 321);
  const IkmDescriptor a =
      ikm_descriptor(patch, {kSingleOrderPairs.data(), kSingleOrderPairs.size()});
  const IkmDescriptor b =
      ikm_descriptor(tu::rot90(patch), {kSingleOrderPairs.data(), kSingleOrderPairs.size()});
  for (size_t i = 0; i < a.values.size(); ++i)
    CHECK(tu::rel_diff(a.values[i], b.values[i]) < 0.05);
}
