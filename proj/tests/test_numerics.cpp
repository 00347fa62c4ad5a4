#include <cmath>
#include <limits>

#include "attnrank/numerics.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace attnrank;

TEST_CASE("lrelu basic values") {
    CHECK(lrelu({3.0}, 0.01)[0] == 3.0);
    CHECK(lrelu({-2.0}, 0.01)[0] == doctest::Approx(-0.02).epsilon(1e-12));
    CHECK(lrelu({0.0}, 0.01002)[0] == 0.0);
}

TEST_CASE("lrelu rejects bad input") {
    CHECK_THROWS_AS(lrelu({std::numeric_limits<double>::quiet_NaN()}, 0.01), NumericError);
    CHECK_THROWS_AS(lrelu({std::numeric_limits<double>::infinity()}, 0.01), NumericError);
    CHECK_THROWS_AS(lrelu({1.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(lrelu({1.0}, 1.0), ConfigError);
}

TEST_CASE("lrelu_grad values and finite differences") {
    CHECK(lrelu_grad({5.0}, 0.01)[0] == 1.0);
    CHECK(lrelu_grad({-1.0}, 0.01)[0] == 0.01);
    CHECK(lrelu_grad({0.0}, 0.01)[0] == 0.01);  // subgradient at 0 is the slope

    for (double x : {0.3, -0.3}) {
        const double eps = 1e-6;
        const double numeric =
            (lrelu({x + eps}, 0.01)[0] - lrelu({x - eps}, 0.01)[0]) / (2.0 * eps);
        const double analytic = lrelu_grad({x}, 0.01)[0];
        CHECK(std::fabs(analytic - numeric) / std::fabs(analytic) < 1e-6);
    }
}

TEST_CASE("lrelu is identity on non-negatives and strictly monotone") {
    SeededRng rng(7);
    for (int it = 0; it < 200; ++it) {
        const double x = rng.uniform(0.0, 10.0);
        CHECK(lrelu({x}, 0.01002)[0] == x);
        const double a = rng.uniform(-5.0, 5.0);
        const double b = rng.uniform(-5.0, 5.0);
        if (a < b) CHECK(lrelu({a}, 0.01002)[0] < lrelu({b}, 0.01002)[0]);
        if (a > b) CHECK(lrelu({a}, 0.01002)[0] > lrelu({b}, 0.01002)[0]);
    }
}

TEST_CASE("softmax forced values") {
    Vector u = softmax({0.0, 0.0, 0.0});
    for (double v : u) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

    Vector w = softmax({std::log(2.0), 0.0, 0.0});
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w[2] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax large inputs stay finite") {
    Vector w = softmax({1000.0, 1000.0, 999.0});
    CHECK(all_finite(w));
    CHECK(w[0] == w[1]);
    CHECK(w[2] < w[0]);
}

TEST_CASE("softmax rejects empty input") { CHECK_THROWS_AS(softmax({}), DimensionError); }

TEST_CASE("softmax sums to one and is shift invariant") {
    SeededRng rng(11);
    for (int it = 0; it < 100; ++it) {
        const int n = 1 + rng.uniform_int(100);
        Vector scores(n);
        for (double& s : scores) s = rng.uniform(-10.0, 10.0);
        Vector w = softmax(scores);

        double sum = 0.0;
        for (double v : w) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-9);

        const double shift = rng.uniform(-100.0, 100.0);
        Vector shifted = scores;
        for (double& s : shifted) s += shift;
        Vector w2 = softmax(shifted);
        for (int i = 0; i < n; ++i) CHECK(std::fabs(w[i] - w2[i]) < 1e-9);
    }
}

TEST_CASE("dense_forward hand values") {
    DenseLayerParams id2;
    id2.W = Matrix(2, 2);
    id2.W.at(0, 0) = 1.0;
    id2.W.at(1, 1) = 1.0;
    id2.b = {0.0, 0.0};
    Vector y = dense_forward({1.0, 0.0}, id2);
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 0.0);

    DenseLayerParams p;
    p.W = Matrix(2, 2);
    p.W.at(0, 0) = 1.0;
    p.W.at(0, 1) = 2.0;
    p.W.at(1, 0) = 3.0;
    p.W.at(1, 1) = 4.0;
    p.b = {1.0, 1.0};
    Vector z = dense_forward({1.0, 1.0}, p);
    CHECK(z[0] == 5.0);
    CHECK(z[1] == 7.0);

    CHECK_THROWS_AS(dense_forward({1.0}, p), DimensionError);
}

TEST_CASE("dense_forward matches naive triple-loop multiply") {
    SeededRng rng(13);
    for (int it = 0; it < 20; ++it) {
        const int in_dim = 1 + rng.uniform_int(64);
        const int out_dim = 1 + rng.uniform_int(64);
        DenseLayerParams p;
        p.W = init_uniform(in_dim, out_dim, 2.0, rng);
        p.b.resize(out_dim);
        for (double& v : p.b) v = rng.uniform(-1.0, 1.0);
        Vector x(in_dim);
        for (double& v : x) v = rng.uniform(-3.0, 3.0);

        const Vector got = dense_forward(x, p);
        const Vector want = test_oracles::naive_dense(x, p.W, p.b);
        for (int j = 0; j < out_dim; ++j) {
            const double denom = std::max(1.0, std::fabs(want[j]));
            CHECK(std::fabs(got[j] - want[j]) / denom < 1e-12);
        }
    }
}

TEST_CASE("grad_check on a quadratic is exact up to rounding") {
    auto loss = [](const Vector& t) { return t[0] * t[0]; };
    const double err = grad_check(loss, {1.0}, {2.0}, 1e-5);
    CHECK(err < 1e-8);
}

TEST_CASE("grad_check on a constant loss returns zero") {
    auto loss = [](const Vector&) { return 4.2; };
    CHECK(grad_check(loss, {1.0, -2.0}, {0.0, 0.0}, 1e-5) == 0.0);
}

TEST_CASE("grad_check rejects bad eps and non-deterministic loss") {
    auto loss = [](const Vector& t) { return t[0]; };
    CHECK_THROWS_AS(grad_check(loss, {1.0}, {1.0}, 1e-2), ConfigError);
    CHECK_THROWS_AS(grad_check(loss, {1.0}, {1.0}, 1e-8), ConfigError);

    int calls = 0;
    auto jitter = [&calls](const Vector& t) { return t[0] + 0.001 * (calls++); };
    CHECK_THROWS_AS(grad_check(jitter, {1.0}, {1.0}, 1e-5), CheckInvalidError);
}

TEST_CASE("grad_check flags a wrong gradient") {
    auto loss = [](const Vector& t) { return t[0] * t[0]; };
    CHECK(grad_check(loss, {1.0}, {-2.0}, 1e-5) > 0.5);
}

TEST_CASE("init_uniform respects the bound and the seed") {
    SeededRng rng(42);
    const double bound = std::sqrt(6.0 / 24.0);
    CHECK(bound == doctest::Approx(0.5).epsilon(1e-15));

    Matrix m = init_uniform(8, 8, bound, rng);
    for (double v : m.data) {
        CHECK(v >= -bound);
        CHECK(v <= bound);
    }

    SeededRng r1(99), r2(99);
    Matrix a = init_uniform(5, 7, 1.0, r1);
    Matrix b = init_uniform(5, 7, 1.0, r2);
    CHECK(a.data == b.data);

    CHECK_THROWS_AS(init_uniform(2, 2, 0.0, rng), ConfigError);
}
