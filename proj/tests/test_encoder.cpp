#include <doctest.h>

#include "polar/encoder.hpp"
#include "polar/error.hpp"
#include "polar/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace polar;

namespace {

std::vector<double> axis(std::size_t dim, std::size_t i, double v = 1.0) {
    std::vector<double> out(dim, 0.0);
    out[i] = v;
    return out;
}

// Reference accumulation written out by hand: signed buckets for every
// 3-gram, then L2 normalization.
std::vector<double> reference_encode(const std::string& lower) {
    std::vector<double> acc(256, 0.0);
    for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
        const std::uint64_t h = xxhash64(lower.substr(i, 3));
        acc[h % 256] += (h & (1ULL << 63)) ? -1.0 : 1.0;
    }
    double n = 0.0;
    for (double v : acc) n += v * v;
    n = std::sqrt(n);
    for (double& v : acc) v /= n;
    return acc;
}

std::string random_text(Rng& rng, std::size_t len) {
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz      ";
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[static_cast<std::size_t>(rng.uniform_int(0, 31))];
    return s;
}

}  // namespace

TEST_CASE("xxhash64 matches published reference vectors") {
    CHECK(xxhash64("") == 0xef46db3751d8e999ULL);
    CHECK(xxhash64("a") == 0xd24ec4f1a98c6e5bULL);
    CHECK(xxhash64("abc") == 0x44bc2cf5ad770999ULL);
    CHECK(xxhash64("0123456789abcdefghijklmnopqrstuvwxyz0123456789") == 0x4ae5684cd402fbb4ULL);
}

TEST_CASE("single gram lands in one signed bucket") {
    // 0x44bc2cf5ad770999: bucket 0x99, top bit clear
    const auto abc = encode({}, "abc");
    CHECK(abc.values == axis(256, 0x99, 1.0));
    // 0xd1d784bb12e4656a: bucket 0x6a, top bit set
    const auto red = encode({}, "RED");
    CHECK(red.values == axis(256, 0x6a, -1.0));
}

TEST_CASE("builtin encoding equals the hand-rolled accumulation") {
    for (const std::string text : {"red mug", "user: use = baking refers to mug mug_01", "the quick brown fox"}) {
        const auto got = encode({}, text);
        const auto want = reference_encode(text);
        REQUIRE(got.dim() == 256);
        for (std::size_t i = 0; i < 256; ++i) CHECK(got.values[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("empty text is the zero vector") {
    const auto e = encode({}, "");
    CHECK(e.dim() == 256);
    CHECK(e.is_zero());
    CHECK(cosine(e, encode({}, "mug")) == 0.0);
}

TEST_CASE("short text is hashed as one gram") {
    const auto e = encode({}, "a");
    CHECK(is_unit(e.values));
    const std::uint64_t h = xxhash64("a");
    CHECK(std::abs(e.values[h % 256]) == 1.0);
}

TEST_CASE("determinism: equal inputs give bitwise-equal vectors") {
    CHECK(encode({}, "red mug") == encode({}, "red mug"));
    EncoderConfig small;
    small.dimension = 64;
    CHECK(encode(small, "red mug") == encode(small, "red mug"));
    CHECK(encode(small, "red mug").dim() == 64);
}

TEST_CASE("cosine arithmetic") {
    const auto a = axis(256, 0);
    const auto b = axis(256, 1);
    CHECK(cosine(a, b) == 0.0);
    std::vector<double> c(256, 0.0);
    c[0] = 0.6;
    c[1] = 0.8;
    CHECK(cosine(c, a) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(cosine(a, c) == cosine(c, a));
    const auto e = encode({}, "keys for the ski trip");
    CHECK(cosine(e, e) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(cosine(std::vector<double>(3, 1.0), std::vector<double>(4, 1.0)), RejectedInput);
}

TEST_CASE("config validation") {
    EncoderConfig c;
    c.dimension = 8;
    CHECK_THROWS_AS(c.validate(), RejectedInput);
    c = {};
    c.ngram = 1;
    CHECK_THROWS_AS(encode(c, "x"), RejectedInput);
    c = {};
    c.mode = EncoderMode::remote;
    CHECK_THROWS_AS(c.validate(), RejectedInput);
}

TEST_CASE("property: unit norm over random non-empty text") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto text = random_text(rng, static_cast<std::size_t>(rng.uniform_int(1, 40)));
        const auto e = encode({}, text);
        REQUIRE(is_unit(e.values));
    }
}

TEST_CASE("property: appending text keeps cosine non-negative for at least 99% of pairs") {
    Rng rng(12);
    int non_negative = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const auto base = random_text(rng, static_cast<std::size_t>(rng.uniform_int(3, 30)));
        const auto tail = random_text(rng, static_cast<std::size_t>(rng.uniform_int(1, 30)));
        if (cosine(encode({}, base), encode({}, base + tail)) >= 0.0) ++non_negative;
    }
    CHECK(non_negative >= 990);
}

TEST_CASE("batch encoding matches single encoding") {
    const std::vector<std::string> texts{"mug", "", "red shoes"};
    const auto batch = encode_batch({}, texts);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < texts.size(); ++i) CHECK(batch[i] == encode({}, texts[i]));
}
