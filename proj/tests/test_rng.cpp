#include "doctest.h"

#include <cmath>

#include "beop/rng.hpp"

using namespace beop;

TEST_CASE("uniform_int covers the range and stays in bounds") {
    Rng rng(1);
    bool seen_lo = false, seen_hi = false;
    for (int i = 0; i < 10000; ++i) {
        const auto v = rng.uniform_int(3, 9);
        CHECK(v >= 3);
        CHECK(v <= 9);
        seen_lo |= v == 3;
        seen_hi |= v == 9;
    }
    CHECK(seen_lo);
    CHECK(seen_hi);
}

TEST_CASE("streams are reproducible and forks are independent of consumption") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng parent(7);
    Rng f1 = parent.fork(3);
    parent.next_u64();
    parent.next_u64();
    Rng f2 = parent.fork(3);
    CHECK(f1.next_u64() == f2.next_u64());
}

TEST_CASE("normal draws have the requested moments") {
    Rng rng(11);
    double sum = 0.0, sq = 0.0;
    const int trials = 200000;
    for (int i = 0; i < trials; ++i) {
        const double x = rng.normal(2.0, 0.5);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / trials;
    const double var = sq / trials - mean * mean;
    CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
    CHECK(std::sqrt(var) == doctest::Approx(0.5).epsilon(0.02));
}
