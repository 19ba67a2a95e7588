#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "rangeface/integral.hpp"
#include "test_util.hpp"

using rangeface::Image;
using rangeface::IntegralImage;
using rangeface::Rect;

TEST_CASE("table entries match the direct double sum exactly") {
    auto rng = testutil::make_rng(11);
    const Image img = testutil::random_int_image(rng, 23, 17);
    const IntegralImage ii = rangeface::integral_image(img);

    REQUIRE(ii.width == 23);
    REQUIRE(ii.height == 17);
    for (int y = 0; y <= img.height; ++y)
        for (int x = 0; x <= img.width; ++x)
            CHECK(ii.tab(x, y) == oracle::integral_entry(img, x, y));
}

TEST_CASE("zero border row and column") {
    auto rng = testutil::make_rng(12);
    const Image img = testutil::random_int_image(rng, 8, 5);
    const IntegralImage ii = rangeface::integral_image(img);
    for (int x = 0; x <= 8; ++x) CHECK(ii.tab(x, 0) == 0.0);
    for (int y = 0; y <= 5; ++y) CHECK(ii.tab(0, y) == 0.0);
}

TEST_CASE("rect sums match the direct loop, including clipped rects") {
    auto rng = testutil::make_rng(13);
    const Image img = testutil::random_int_image(rng, 31, 29);
    const IntegralImage ii = rangeface::integral_image(img);

    std::uniform_int_distribution<int> coord(-8, 38);
    for (int trial = 0; trial < 500; ++trial) {
        int x0 = coord(rng), x1 = coord(rng), y0 = coord(rng), y1 = coord(rng);
        if (x1 < x0) std::swap(x0, x1);
        if (y1 < y0) std::swap(y0, y1);
        const Rect r{x0, y0, x1, y1};
        CHECK(rangeface::rect_sum(ii, r) == oracle::rect_sum(img, x0, y0, x1, y1));
    }
}

TEST_CASE("whole-image rect equals the last table entry") {
    auto rng = testutil::make_rng(14);
    const Image img = testutil::random_int_image(rng, 12, 12);
    const IntegralImage ii = rangeface::integral_image(img);
    CHECK(rangeface::rect_sum(ii, {0, 0, 11, 11}) == ii.tab(12, 12));
}

TEST_CASE("empty or fully-outside rects sum to zero") {
    auto rng = testutil::make_rng(15);
    const Image img = testutil::random_int_image(rng, 10, 10);
    const IntegralImage ii = rangeface::integral_image(img);
    CHECK(rangeface::rect_sum(ii, {4, 4, 3, 9}) == 0.0);    // inverted x
    CHECK(rangeface::rect_sum(ii, {-5, -5, -1, -1}) == 0.0);  // left of the image
    CHECK(rangeface::rect_sum(ii, {10, 0, 12, 9}) == 0.0);    // right of the image
}

TEST_CASE("single-pixel rects read the image") {
    auto rng = testutil::make_rng(16);
    const Image img = testutil::random_int_image(rng, 9, 7);
    const IntegralImage ii = rangeface::integral_image(img);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x) CHECK(rangeface::rect_sum(ii, {x, y, x, y}) == img.at(x, y));
}

TEST_CASE("additivity: disjoint split halves sum to the whole") {
    auto rng = testutil::make_rng(17);
    const Image img = testutil::random_int_image(rng, 20, 14);
    const IntegralImage ii = rangeface::integral_image(img);
    std::uniform_int_distribution<int> split(0, 18);
    for (int trial = 0; trial < 100; ++trial) {
        const int s = split(rng);
        const double whole = rangeface::rect_sum(ii, {0, 0, 19, 13});
        const double left = rangeface::rect_sum(ii, {0, 0, s, 13});
        const double right = rangeface::rect_sum(ii, {s + 1, 0, 19, 13});
        CHECK(whole == left + right);
    }
}

TEST_CASE("non-integer pixels still agree with the oracle closely") {
    auto rng = testutil::make_rng(18);
    const Image img = testutil::random_real_image(rng, 16, 16, -1.0, 1.0);
    const IntegralImage ii = rangeface::integral_image(img);
    // same accumulation order row by row, so the agreement is tight
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<int> c(0, 15);
        int x0 = c(rng), x1 = c(rng), y0 = c(rng), y1 = c(rng);
        if (x1 < x0) std::swap(x0, x1);
        if (y1 < y0) std::swap(y0, y1);
        const double got = rangeface::rect_sum(ii, {x0, y0, x1, y1});
        const double want = oracle::rect_sum(img, x0, y0, x1, y1);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}
