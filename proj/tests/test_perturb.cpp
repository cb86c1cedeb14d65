#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "gpcsense/error.hpp"
#include "gpcsense/perturb.hpp"
#include "helpers/test_util.hpp"

using namespace gpcsense;

namespace {

Image noise(int w, int h, int c, std::uint64_t seed) {
  Image img(w, h, c);
  std::mt19937_64 rng(seed);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

// Smooth content so resampling errors stay small.
Image gradient(int w, int h) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<std::uint8_t>(std::lround(100 + 60 * std::sin(x / 9.0) * std::cos(y / 7.0)));
  return img;
}

}  // namespace

TEST_CASE("image validation") {
  CHECK_NOTHROW(validate(Image(3, 2, 1)));
  CHECK_NOTHROW(validate(Image(3, 2, 3)));
  CHECK_THROWS_AS(validate(Image(0, 2, 1)), ValidationError);
  CHECK_THROWS_AS(validate(Image(2, 2, 2)), ValidationError);
  Image bad(2, 2, 1);
  bad.pixels.pop_back();
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("brightness scaling") {
  const Image img = noise(17, 9, 3, 1);
  CHECK(brightness(img, 1.0) == img);
  CHECK(brightness(img, 0.0) == Image(17, 9, 3, 0));

  Image px(1, 1, 1, 200);
  CHECK(brightness(px, 1.5).at(0, 0) == 255);
  px.at(0, 0) = 5;
  CHECK(brightness(px, 0.5).at(0, 0) == 3);  // 2.5 rounds away from zero
  px.at(0, 0) = 3;
  CHECK(brightness(px, 0.5).at(0, 0) == 2);
  px.at(0, 0) = 100;
  CHECK(brightness(px, 1.234).at(0, 0) == 123);

  CHECK_THROWS_AS(brightness(img, -0.1), ValidationError);
  CHECK_THROWS_AS(brightness(img, std::nan("")), ValidationError);

  const Image lo = brightness(img, 0.7);
  const Image hi = brightness(img, 1.3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(lo.pixels[i] <= hi.pixels[i]);
}

TEST_CASE("rotation") {
  const Image img = noise(31, 21, 1, 2);
  CHECK(rotate(img, 0.0) == img);

  SUBCASE("constant interior is preserved") {
    const Image flat(41, 41, 1, 180);
    const Image out = rotate(flat, 17.0);
    for (int y = 0; y < 41; ++y)
      for (int x = 0; x < 41; ++x) {
        const double r = std::hypot(x - 20.0, y - 20.0);
        if (r <= 18.0) CHECK(out.at(x, y) == 180);
      }
  }

  SUBCASE("forward and back recovers the interior disk") {
    const Image src = gradient(64, 64);
    const Image back = rotate(rotate(src, 30.0), -30.0);
    const double c = 31.5;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        if (std::hypot(x - c, y - c) <= 24.0) CHECK(std::abs(int(back.at(x, y)) - int(src.at(x, y))) <= 2);
      }
  }

  SUBCASE("positive angles turn counter-clockwise on screen") {
    Image dot(21, 21, 1, 0);
    dot.at(12, 10) = 255;  // two pixels right of center
    const Image out = rotate(dot, 90.0);
    CHECK(out.at(10, 8) == 255);  // now two pixels above center
    CHECK(out.at(12, 10) == 0);
  }

  SUBCASE("uncovered corners take the fill value") {
    const Image out = rotate(Image(20, 20, 1, 50), 45.0, {.fill = 7});
    CHECK(out.at(0, 0) == 7);
    CHECK(out.at(19, 19) == 7);
  }

  CHECK_THROWS_AS(rotate(img, INFINITY), ValidationError);
}

TEST_CASE("tilt") {
  const Image img = noise(24, 16, 3, 3);
  CHECK(tilt(img, 0.0) == img);
  CHECK_THROWS_AS(tilt(img, 90.0), ValidationError);
  CHECK_THROWS_AS(tilt(img, -95.0), ValidationError);
  CHECK_THROWS_AS(tilt(img, 10.0, {.fill = 0, .focal_length = 0.0}), ValidationError);

  SUBCASE("center is a fixed point") {
    const Image src = noise(33, 33, 1, 4);
    for (double deg : {-40.0, -10.0, 25.0, 60.0}) CHECK(tilt(src, deg).at(16, 16) == src.at(16, 16));
  }

  SUBCASE("constant interior is preserved near the center") {
    const Image out = tilt(Image(40, 40, 1, 90), 20.0);
    for (int y = 15; y < 25; ++y)
      for (int x = 15; x < 25; ++x) CHECK(out.at(x, y) == 90);
  }

  SUBCASE("positive tilt pushes the bottom edge away") {
    const Image out = tilt(Image(64, 64, 1, 255), 30.0);
    for (int x = 0; x < 64; ++x) {
      CHECK(out.at(x, 0) == 255);
      CHECK(out.at(x, 63) == 0);
    }
    const Image mirrored = tilt(Image(64, 64, 1, 255), -30.0);
    for (int x = 0; x < 64; ++x) {
      CHECK(mirrored.at(x, 0) == 0);
      CHECK(mirrored.at(x, 63) == 255);
    }
  }
}

TEST_CASE("perturbation specs") {
  const Image img = noise(20, 14, 1, 5);

  SUBCASE("identity parameters reproduce the input") {
    const PerturbationSpec spec({{PerturbationKind::brightness, "b"}, {PerturbationKind::rotation, "r"}, {PerturbationKind::tilt, "t"}});
    CHECK(apply(spec, img, {{"b", 1.0}, {"r", 0.0}, {"t", 0.0}}) == img);
  }

  SUBCASE("brightness only") {
    const PerturbationSpec spec({{PerturbationKind::brightness, "b"}});
    CHECK(apply(spec, img, {{"b", 0.6}, {"unused", 3.0}}) == brightness(img, 0.6));
  }

  SUBCASE("steps are applied in canonical order whatever the listing") {
    const PerturbationSpec spec({{PerturbationKind::tilt, "t"}, {PerturbationKind::rotation, "r"}, {PerturbationKind::brightness, "b"}});
    REQUIRE(spec.steps().size() == 3);
    CHECK(spec.steps()[0].kind == PerturbationKind::brightness);
    CHECK(spec.steps()[2].kind == PerturbationKind::tilt);
    const std::map<std::string, double> xi{{"b", 1.4}, {"r", 12.0}, {"t", -15.0}};
    CHECK(apply(spec, img, xi) == tilt(rotate(brightness(img, 1.4), 12.0), -15.0));
  }

  SUBCASE("errors") {
    const PerturbationSpec spec({{PerturbationKind::rotation, "r"}});
    CHECK_THROWS_AS(apply(spec, img, {{"b", 1.0}}), ValidationError);
    CHECK_THROWS_AS(PerturbationSpec({{PerturbationKind::rotation, "a"}, {PerturbationKind::rotation, "b"}}), ValidationError);
    CHECK_THROWS_AS(PerturbationSpec({{PerturbationKind::tilt, ""}}), ValidationError);
    CHECK_THROWS_AS(perturbation_kind_from_string("blur"), ValidationError);
  }

  CHECK(perturbation_kind_from_string(to_string(PerturbationKind::tilt)) == PerturbationKind::tilt);
}

TEST_CASE("png round trip") {
  testutil::TempDir dir("perturb");
  for (int channels : {1, 3}) {
    const Image img = noise(37, 23, channels, 10 + channels);
    const auto path = dir / ("img" + std::to_string(channels) + ".png");
    write_png(path, img);
    const Image back = read_png(path);
    CHECK(back == img);

    // Identity transforms keep the encoded file byte-identical.
    const PerturbationSpec spec({{PerturbationKind::brightness, "b"}, {PerturbationKind::rotation, "r"}, {PerturbationKind::tilt, "t"}});
    const auto again = dir / ("again" + std::to_string(channels) + ".png");
    write_png(again, apply(spec, back, {{"b", 1.0}, {"r", 0.0}, {"t", 0.0}}));
    CHECK(testutil::slurp(again) == testutil::slurp(path));

    const Image warped = apply(spec, back, {{"b", 0.8}, {"r", 20.0}, {"t", 10.0}});
    CHECK(warped.width == img.width);
    CHECK(warped.height == img.height);
    CHECK(warped.channels == img.channels);
    CHECK(warped == apply(spec, back, {{"b", 0.8}, {"r", 20.0}, {"t", 10.0}}));
  }
  CHECK_THROWS_AS(read_png(dir / "missing.png"), ValidationError);
  testutil::write_text(dir / "junk.png", "not a png");
  CHECK_THROWS_AS(read_png(dir / "junk.png"), ValidationError);
}
