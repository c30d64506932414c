#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "trilayer/rng.hpp"

using trilayer::Rng;

TEST_CASE("same seed reproduces the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in [0, 1)") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);  // the stream actually spreads out
    CHECK(hi > 0.99);
}

TEST_CASE("uniform_int stays in range and hits every value") {
    Rng rng(7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t v = rng.uniform_int(10);
        CHECK(v < 10);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);
}

TEST_CASE("shuffle permutes without loss") {
    Rng rng(3);
    std::vector<int> values{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> shuffled = values;
    rng.shuffle(shuffled);
    std::vector<int> sorted = shuffled;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == values);
}

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(trilayer::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(trilayer::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(trilayer::fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("derive_seed separates labels and is stable") {
    const std::uint64_t global = 1234;
    CHECK(trilayer::derive_seed(global, "lda") ==
          trilayer::derive_seed(global, "lda"));
    std::set<std::uint64_t> seeds;
    for (const char* label : {"lda", "sgns", "weat", "subsample:v1:caption",
                              "subsample:v1:comments", "pearson:a:b:c"}) {
        seeds.insert(trilayer::derive_seed(global, label));
    }
    CHECK(seeds.size() == 6);
    CHECK(trilayer::derive_seed(1, "x") != trilayer::derive_seed(2, "x"));
}
