#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "lfgnn/parallel.hpp"
#include "lfgnn/rng.hpp"

using namespace lfgnn;

TEST_CASE("same seed gives the same stream, different seeds diverge") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
    }
    int differing = 0;
    Rng a2(42);
    for (int i = 0; i < 100; ++i)
        if (a2.next_u64() != c.next_u64()) ++differing;
    CHECK(differing > 90);
}

TEST_CASE("split streams are independent of draw order") {
    Rng root(7);
    Rng s1 = root.split(1);
    // Drawing from the root must not disturb already-derived children.
    root.next_u64();
    root.next_u64();
    Rng s1b = root.split(1);
    CHECK(s1.next_u64() == s1b.next_u64());

    Rng s2 = root.split(2);
    CHECK(root.split(1).next_u64() != s2.next_u64());

    // Multi-index splits are distinct from nested single splits only if equal
    // indices collide; pin the intended equivalence.
    CHECK(root.split(3, 4).next_u64() == root.split(3).split(4).next_u64());
}

TEST_CASE("next_double covers [0,1) and next_open_double avoids zero") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.next_open_double();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("next_index is in range and roughly uniform") {
    Rng rng(17);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 20000; ++i) {
        const std::uint64_t k = rng.next_index(10);
        REQUIRE(k < 10);
        ++counts[static_cast<std::size_t>(k)];
    }
    for (int c : counts) {
        CHECK(c > 1600);
        CHECK(c < 2400);
    }
}

TEST_CASE("gaussian moments are sane") {
    Rng rng(2024);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_gaussian();
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("gaussian consumes a fixed number of counter steps") {
    Rng a(9);
    Rng b(9);
    a.next_gaussian();
    b.next_u64();
    b.next_u64();
    // After one gaussian (two raw draws) the streams realign.
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct split indices give distinct outputs") {
    Rng root(1);
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(root.split(i).next_u64());
    CHECK(seen.size() == 1000);
}

TEST_CASE("parallel_for visits every index once regardless of job count") {
    for (int jobs : {1, 2, 8}) {
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
}

TEST_CASE("parallel_for propagates the first exception") {
    CHECK_THROWS_AS(
        parallel_for(100, 4,
                     [&](std::size_t i) {
                         if (i == 50) throw std::runtime_error("boom");
                     }),
        std::runtime_error);
}

TEST_CASE("resolve_jobs maps zero to a positive count") {
    CHECK(resolve_jobs(0) >= 1);
    CHECK(resolve_jobs(3) == 3);
}
