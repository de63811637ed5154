#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "smikm/error.hpp"
#include "smikm/keypoints.hpp"
#include "testutil.hpp"

using namespace smikm;

namespace {

// soft bright blob on black
ImageBuf blob_image(int size, double cx, double cy, double radius) {
  ImageBuf img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      const double v = 255.0 * std::exp(-d2 / (2.0 * radius * radius));
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
    }
  return img;
}

ImageBuf multi_blob_field(int w, int h, std::uint64_t seed, int margin) {
  ImageBuf img(w, h, 1);
  std::fill(img.data.begin(), img.data.end(), 100);
  std::mt19937_64 rng(seed);
  auto unit = [&] { return (rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 14; ++i) {
    const double cx = margin + unit() * (w - 2 * margin);
    const double cy = margin + unit() * (h - 2 * margin);
    const double r = 1.5 + unit() * 2.5;
    const double amp = (unit() > 0.5 ? 1.0 : -1.0) * (90 + unit() * 60);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        const int v = static_cast<int>(img.at(x, y) + amp * std::exp(-d2 / (2 * r * r)));
        img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
  }
  return img;
}

}  // namespace

TEST_CASE("uniform image yields no keypoints") {
  CHECK_THROWS_AS(detect_keypoints(tu::solid_gray(64, 64, 128)), EmptyResult);
}

TEST_CASE("small images are rejected") {
  CHECK_THROWS_AS(detect_keypoints(tu::solid_gray(16, 64, 10)), ParameterError);
}

TEST_CASE("a single bright blob is found near its center") {
  const ImageBuf img = blob_image(64, 29.0, 33.0, 2.5);
  const std::vector<Keypoint> kps = detect_keypoints(img);
  REQUIRE(!kps.empty());
  bool near = false;
  for (const Keypoint& kp : kps)
    if (std::abs(kp.position.x - 29) <= 3 && std::abs(kp.position.y - 33) <= 3) near = true;
  CHECK(near);
}

TEST_CASE("keypoints come back strongest-first and capped") {
  const ImageBuf img = multi_blob_field(128, 96, 9, 12);
  DogParams params;
  const std::vector<Keypoint> all = detect_keypoints(img, params);
  CHECK(all.size() <= 500);
  for (size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].response >= all[i].response);
  for (const Keypoint& kp : all) CHECK(kp.response >= params.threshold);

  params.max_keypoints = 5;
  const std::vector<Keypoint> top = detect_keypoints(img, params);
  CHECK(top.size() <= 5);
  if (top.size() == 5 && all.size() >= 5)
    for (int i = 0; i < 5; ++i) CHECK(top[i].response == all[i].response);
}

TEST_CASE("detector is translation-equivariant on interior content") {
  const ImageBuf img = multi_blob_field(128, 128, 21, 28);
  const int dx = 8, dy = 4;
  ImageBuf shifted = tu::shift(img, dx, dy, 100);

  const std::vector<Keypoint> a = detect_keypoints(img);
  const std::vector<Keypoint> b = detect_keypoints(shifted);
  REQUIRE(!a.empty());

  int interior = 0, matched = 0;
  for (const Keypoint& kp : a) {
    if (kp.position.x < 24 || kp.position.x >= 96 || kp.position.y < 24 || kp.position.y >= 96)
      continue;
    ++interior;
    for (const Keypoint& other : b)
      if (std::abs(other.position.x - (kp.position.x + dx)) <= 1 &&
          std::abs(other.position.y - (kp.position.y + dy)) <= 1) {
        ++matched;
        break;
      }
  }
  REQUIRE(interior > 0);
  CHECK(matched >= (interior * 9) / 10);
}

TEST_CASE("grid fallback covers the frame") {
  const std::vector<Keypoint> grid = grid_keypoints(tu::solid_gray(64, 64, 0), 32);
  CHECK(grid.size() == 4);
  CHECK(grid[0].position.x == 16);
  CHECK(grid[0].position.y == 16);
  const std::vector<Keypoint> tiny = grid_keypoints(tu::solid_gray(8, 8, 0), 32);
  CHECK(tiny.size() == 1);
}

TEST_CASE("extract_patches is a bijection with the keypoint list") {
  const ImageBuf gray = tu::random_gray(64, 64, 123);
  SaliencyMap map;
  map.width = 64;
  map.height = 64;
  map.values.assign(64 * 64, 0.0f);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) map.values[static_cast<size_t>(y) * 64 + x] = 0.9f;
  const RegionMasks masks = segment(map);

  const PatchSet empty_set = extract_patches(gray, {}, masks, 30);
  CHECK(empty_set.items.empty());

  std::vector<Keypoint> kps = {{{10, 10}, 1.6f, 1.0f}, {{50, 50}, 1.6f, 0.5f},
                               {{0, 63}, 1.6f, 0.2f}};
  const PatchSet set = extract_patches(gray, kps, masks, 30);
  REQUIRE(set.items.size() == kps.size());
  for (const auto& item : set.items) {
    CHECK(item.patch.width == 30);
    CHECK(item.patch.height == 30);
  }
  CHECK(set.items[0].in_foreground);   // y=10 is in the salient half
  CHECK(!set.items[1].in_foreground);  // y=50 is background
  CHECK(!set.items[2].in_foreground);
}
