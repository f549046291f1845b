// Tests for PNG encode/decode, cropping, bilinear resize, and luminance.
#include "doctest.h"

#include "rcids/error.hpp"
#include "rcids/image/image.hpp"
#include "rcids/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

using namespace rcids;

namespace {

ImageBuffer random_image(size_t w, size_t h, uint64_t seed) {
    ImageBuffer img(w, h);
    Rng rng(seed);
    for (auto& b : img.pixels) b = static_cast<uint8_t>(rng.below(256));
    return img;
}

ImageBuffer solid(size_t w, size_t h, uint8_t r, uint8_t g, uint8_t b) {
    ImageBuffer img(w, h);
    for (size_t i = 0; i < w * h; ++i) {
        img.pixels[i * 3 + 0] = r;
        img.pixels[i * 3 + 1] = g;
        img.pixels[i * 3 + 2] = b;
    }
    return img;
}

}  // namespace

TEST_CASE("png roundtrip preserves every pixel") {
    ImageBuffer img = random_image(37, 23, 0xfeedbeefull);
    std::string bytes = encode_png(img);
    ImageBuffer back = decode_png(bytes);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("png encoding is byte deterministic") {
    ImageBuffer img = random_image(64, 48, 42);
    CHECK(encode_png(img) == encode_png(img));
}

TEST_CASE("decoding garbage reports an io failure") {
    try {
        decode_png("not a png at all");
        FAIL("expected decode to throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoFailure);
    }
}

TEST_CASE("center crop keeps the middle square") {
    // 6x4 image; crop is 4x4 starting at x0 = (6-4)/2 = 1.
    ImageBuffer img = random_image(6, 4, 7);
    ImageBuffer c = center_crop_square(img);
    REQUIRE(c.width == 4);
    REQUIRE(c.height == 4);
    for (size_t y = 0; y < 4; ++y)
        for (size_t x = 0; x < 4; ++x)
            for (int ch = 0; ch < 3; ++ch)
                CHECK(c.px(x, y)[ch] == img.px(x + 1, y)[ch]);
}

TEST_CASE("center crop with odd margin floors the left offset") {
    // 7x4: side 4, x0 = (7-4)/2 = 1 (floor), so columns 1..4 survive.
    ImageBuffer img = random_image(7, 4, 8);
    ImageBuffer c = center_crop_square(img);
    REQUIRE(c.width == 4);
    CHECK(c.px(0, 0)[0] == img.px(1, 0)[0]);
    CHECK(c.px(3, 3)[2] == img.px(4, 3)[2]);
}

TEST_CASE("center crop of a tall image trims rows") {
    ImageBuffer img = random_image(4, 9, 9);
    ImageBuffer c = center_crop_square(img);
    REQUIRE(c.width == 4);
    REQUIRE(c.height == 4);
    // y0 = (9-4)/2 = 2.
    CHECK(c.px(0, 0)[1] == img.px(0, 2)[1]);
    CHECK(c.px(3, 3)[0] == img.px(3, 5)[0]);
}

TEST_CASE("bilinear resize of a constant image stays exactly constant") {
    ImageBuffer img = solid(200, 200, 128, 37, 250);
    ImageBuffer out = resize_bilinear(img, 100, 100);
    REQUIRE(out.width == 100);
    REQUIRE(out.height == 100);
    for (size_t i = 0; i < 100 * 100; ++i) {
        CHECK(out.pixels[i * 3 + 0] == 128);
        CHECK(out.pixels[i * 3 + 1] == 37);
        CHECK(out.pixels[i * 3 + 2] == 250);
    }
}

TEST_CASE("bilinear resize to the same size copies pixels") {
    ImageBuffer img = random_image(13, 11, 10);
    ImageBuffer out = resize_bilinear(img, 13, 11);
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("bilinear downscale averages with half-pixel centers") {
    // 2x2 red channel {10,20;30,40} shrunk to 1x1 samples the exact center:
    // ((10+20)/2 + (30+40)/2)/2 = 25.
    ImageBuffer img(2, 2);
    const uint8_t reds[4] = {10, 20, 30, 40};
    for (size_t i = 0; i < 4; ++i) img.pixels[i * 3] = reds[i];
    ImageBuffer out = resize_bilinear(img, 1, 1);
    CHECK(out.px(0, 0)[0] == 25);
    CHECK(out.px(0, 0)[1] == 0);
}

TEST_CASE("bilinear upscale of a horizontal ramp is monotone with clamped edges") {
    ImageBuffer img(2, 1);
    img.pixels = {0, 0, 0, 255, 255, 255};
    ImageBuffer out = resize_bilinear(img, 8, 1);
    for (size_t x = 1; x < 8; ++x) CHECK(out.px(x, 0)[0] >= out.px(x - 1, 0)[0]);
    CHECK(out.px(0, 0)[0] == 0);
    CHECK(out.px(7, 0)[0] == 255);
}

TEST_CASE("mean luminance of black, white, and red") {
    CHECK(mean_luminance(solid(10, 10, 0, 0, 0)) == doctest::Approx(0.0));
    CHECK(mean_luminance(solid(10, 10, 255, 255, 255)) == doctest::Approx(1.0));
    CHECK(mean_luminance(solid(10, 10, 255, 0, 0)) == doctest::Approx(0.299).epsilon(1e-6));
}
