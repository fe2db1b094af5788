#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gd/losses.hpp"
#include "gd/mlp.hpp"
#include "gd/optim.hpp"
#include "gd/rng.hpp"

using namespace gd;

namespace {

std::vector<double> random_vector(SeededRng& rng, std::size_t n, double lo = -3.0,
                                  double hi = 3.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

std::vector<double> random_distribution(SeededRng& rng, std::size_t n) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) {
        x = rng.uniform(1e-4, 1.0);
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

}  // namespace

TEST_CASE("cosine_similarity basics") {
    CHECK(cosine_similarity(std::vector<double>{1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine_similarity(std::vector<double>{1, 2}, {2, 4}) == doctest::Approx(1.0));
    CHECK(cosine_similarity(std::vector<double>{1, 0}, {-1, 0}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS((void)cosine_similarity(std::vector<double>{0, 0}, {1, 0}), ZeroVector);
    CHECK_THROWS_AS((void)cosine_similarity(std::vector<double>{1, 0}, {1, 0, 0}), DimMismatch);
}

TEST_CASE("cosine_similarity scale invariance") {
    SeededRng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        auto a = random_vector(rng, 1 + rep % 16);
        auto b = random_vector(rng, 1 + rep % 16);
        if (norm(a) == 0.0 || norm(b) == 0.0) continue;
        double c = rng.uniform(0.01, 100.0);
        double d = rng.uniform(0.01, 100.0);
        auto ca = a, db = b;
        for (double& x : ca) x *= c;
        for (double& x : db) x *= d;
        CHECK(cosine_similarity(a, b) == doctest::Approx(cosine_similarity(ca, db)).epsilon(1e-12));
    }
}

TEST_CASE("softmax closed forms") {
    auto u = softmax(std::vector<double>{0, 0}, 1.0);
    CHECK(u[0] == doctest::Approx(0.5));
    CHECK(u[1] == doctest::Approx(0.5));

    auto p = softmax(std::vector<double>{std::log(2.0), 0.0}, 1.0);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)softmax(std::vector<double>{1.0}, 0.0), BadTemperature);
    CHECK_THROWS_AS((void)softmax(std::vector<double>{1.0}, -1.0), BadTemperature);
}

TEST_CASE("softmax survives huge scores and matches an extended-precision oracle") {
    // long double has enough exponent range to evaluate exp(1000) directly
    auto p = softmax(std::vector<double>{1000.0, 0.0}, 1.0);
    long double e0 = expl(1000.0L), e1 = expl(0.0L);
    long double z = e0 + e1;
    CHECK(std::isfinite(p[0]));
    CHECK(std::isfinite(p[1]));
    CHECK(p[0] == doctest::Approx(static_cast<double>(e0 / z)).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(static_cast<double>(e1 / z)).epsilon(1e-15));
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax sums to one for random inputs") {
    SeededRng rng(7);
    std::size_t positive_checked = 0;
    for (int rep = 0; rep < 300; ++rep) {
        std::size_t n = 1 + rng.below(256);
        auto v = random_vector(rng, n, -50.0, 50.0);
        double t = rng.uniform(0.05, 4.0);
        auto p = softmax(v, t);
        double sum = 0.0;
        for (double x : p) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

        double lo = *std::min_element(v.begin(), v.end());
        double hi = *std::max_element(v.begin(), v.end());
        if ((hi - lo) / t < 700.0) {  // below the exp underflow threshold
            ++positive_checked;
            for (double x : p) CHECK(x > 0.0);
        }
    }
    CHECK(positive_checked > 100);
}

TEST_CASE("cross_entropy closed forms") {
    CHECK(cross_entropy(std::vector<double>{1, 0}, {1, 0}) == doctest::Approx(0.0));
    CHECK(cross_entropy(std::vector<double>{1, 0}, {0.5, 0.5}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    double expected = -(0.5 * std::log(0.25) + 0.5 * std::log(0.75));
    CHECK(cross_entropy(std::vector<double>{0.5, 0.5}, {0.25, 0.75}) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.836988).epsilon(1e-6));

    CHECK_THROWS_AS((void)cross_entropy(std::vector<double>{0.9, 0.9}, {0.5, 0.5}),
                    NotADistribution);
    CHECK_THROWS_AS((void)cross_entropy(std::vector<double>{0.5, 0.5}, {1.5, -0.5}),
                    NotADistribution);
}

TEST_CASE("cross_entropy obeys the Gibbs inequality") {
    SeededRng rng(23);
    for (int rep = 0; rep < 2000; ++rep) {
        std::size_t n = 2 + rng.below(16);
        auto t = random_distribution(rng, n);
        auto s = random_distribution(rng, n);
        CHECK(cross_entropy(t, s) >= cross_entropy(t, t) - 1e-9);
    }
}

TEST_CASE("cosine_distance_loss endpoints and range") {
    std::vector<double> v{0.3, -1.7, 2.2};
    CHECK(cosine_distance_loss(v, v) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine_distance_loss(std::vector<double>{1, 0}, {0, 1}) == doctest::Approx(2.0));
    CHECK(cosine_distance_loss(std::vector<double>{1, 0}, {-1, 0}) == doctest::Approx(4.0));

    SeededRng rng(5);
    for (int rep = 0; rep < 500; ++rep) {
        auto a = random_vector(rng, 2 + rep % 8);
        auto b = random_vector(rng, 2 + rep % 8);
        if (norm(a) == 0.0 || norm(b) == 0.0) continue;
        double d = cosine_distance_loss(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= 4.0);
        // zero iff positive scalar multiples
        auto scaled = a;
        for (double& x : scaled) x *= 2.5;
        CHECK(cosine_distance_loss(a, scaled) == doctest::Approx(0.0).epsilon(1e-9));
        if (d < 1e-9) {
            double ratio = 0.0;
            bool set = false;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (std::abs(b[i]) > 1e-9) {
                    double r = a[i] / b[i];
                    if (!set) {
                        ratio = r;
                        set = true;
                    } else {
                        CHECK(r == doctest::Approx(ratio).epsilon(1e-4));
                    }
                }
            }
            CHECK(ratio > 0.0);
        }
    }
}

TEST_CASE("backward_grad hand-checked derivative") {
    // loss = 0.5 * |W x|^2 with x = [1], W = [[2]]  ->  dW = [[2]]
    ParamSet params;
    params.add("W", Matrix(1, 1, {2.0}));
    ModelFn model = [](Tape& t, const std::vector<Var>& p, Var x) { return t.matmul(p[0], x); };
    LossFn loss = [](Tape& t, Var out) { return t.scale(t.sum_all(t.square(out)), 0.5); };
    ParamSet grads = backward_grad(model, loss, params, Matrix(1, 1, {1.0}));
    CHECK(grads.by_name("W")(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("backward_grad gives zero for unused parameters") {
    ParamSet params;
    params.add("used", Matrix(1, 1, {1.5}));
    params.add("unused", Matrix(2, 2, {1, 2, 3, 4}));
    ModelFn model = [](Tape& t, const std::vector<Var>& p, Var x) { return t.matmul(p[0], x); };
    LossFn loss = [](Tape& t, Var out) { return t.sum_all(t.square(out)); };
    ParamSet grads = backward_grad(model, loss, params, Matrix(1, 1, {3.0}));
    for (std::size_t i = 0; i < 4; ++i) CHECK(grads.by_name("unused").data()[i] == 0.0);
    CHECK(grads.by_name("used")(0, 0) != 0.0);
}

TEST_CASE("gradcheck: linear model at tight tolerance") {
    SeededRng rng(31);
    ParamSet params;
    Matrix w(3, 2);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1, 1);
    params.add("W", std::move(w));
    ModelFn model = [](Tape& t, const std::vector<Var>& p, Var x) { return t.matmul(x, p[0]); };
    LossFn loss = [](Tape& t, Var out) { return t.mean_all(t.square(out)); };
    Matrix input(4, 3);
    for (std::size_t i = 0; i < input.size(); ++i) input.data()[i] = rng.uniform(-1, 1);
    GradReport report = grad_check(model, loss, params, input, 1e-6);
    CHECK(report.pass);
}

TEST_CASE("gradcheck: 2-layer MLP with softmax cross-entropy") {
    SeededRng rng(37);
    MlpSpec spec{{3, 5, 4}, Activation::Tanh};
    ParamSet params = init_mlp(spec, rng, "");
    Matrix input(6, 3);
    for (std::size_t i = 0; i < input.size(); ++i) input.data()[i] = rng.uniform(-1, 1);
    Matrix targets(6, 4);
    for (std::size_t i = 0; i < 6; ++i) {
        auto row = random_distribution(rng, 4);
        std::copy(row.begin(), row.end(), targets.row(i).begin());
    }
    ModelFn model = [&](Tape& t, const std::vector<Var>& p, Var x) {
        return mlp_forward(t, spec, p, x);
    };
    LossFn loss = [&](Tape& t, Var out) {
        return t.softmax_cross_entropy_mean(out, targets, 0.5);
    };
    GradReport report = grad_check(model, loss, params, input, 1e-4);
    CHECK(report.pass);
}

TEST_CASE("gradcheck: 3-layer MLP with cosine distance loss") {
    SeededRng rng(41);
    MlpSpec spec{{4, 6, 6, 3}, Activation::Tanh};
    ParamSet params = init_mlp(spec, rng, "");
    Matrix input(5, 4);
    for (std::size_t i = 0; i < input.size(); ++i) input.data()[i] = rng.uniform(-1, 1);
    Matrix targets(5, 3);
    for (std::size_t i = 0; i < targets.size(); ++i) targets.data()[i] = rng.uniform(0.2, 1.0);
    ModelFn model = [&](Tape& t, const std::vector<Var>& p, Var x) {
        return mlp_forward(t, spec, p, x);
    };
    LossFn loss = [&](Tape& t, Var out) { return t.cosine_alignment_mean(out, targets); };
    GradReport report = grad_check(model, loss, params, input, 1e-4);
    CHECK(report.pass);
}

TEST_CASE("corrupted gradients fail the finite-difference comparison") {
    SeededRng rng(43);
    ParamSet params;
    Matrix w(2, 2);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(0.5, 1.5);
    params.add("W", std::move(w));
    ModelFn model = [](Tape& t, const std::vector<Var>& p, Var x) { return t.matmul(x, p[0]); };
    LossFn loss = [](Tape& t, Var out) { return t.sum_all(t.square(out)); };
    Matrix input(3, 2);
    for (std::size_t i = 0; i < input.size(); ++i) input.data()[i] = rng.uniform(-1, 1);

    ParamSet corrupted = backward_grad(model, loss, params, input);
    corrupted.by_name("W")(0, 0) = corrupted.by_name("W")(0, 0) * 1.5 + 0.1;

    double h = 1e-5;
    double worst = 0.0;
    ParamSet probe = params;
    for (std::size_t j = 0; j < 4; ++j) {
        double saved = probe.by_name("W").data()[j];
        probe.by_name("W").data()[j] = saved + h;
        double lp = eval_loss(model, loss, probe, input);
        probe.by_name("W").data()[j] = saved - h;
        double lm = eval_loss(model, loss, probe, input);
        probe.by_name("W").data()[j] = saved;
        double fd = (lp - lm) / (2 * h);
        double an = corrupted.by_name("W").data()[j];
        worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
    CHECK(worst > 1e-2);
}

TEST_CASE("sgd_momentum_step recursions") {
    ParamSet params, grads, state;
    params.add("p", Matrix(1, 1, {0.0}));
    grads.add("p", Matrix(1, 1, {1.0}));
    state.add("p", Matrix(1, 1, {0.0}));

    SUBCASE("momentum 0 is plain SGD") {
        sgd_momentum_step(params, grads, 1.0, 0.0, state);
        CHECK(params.by_name("p")(0, 0) == doctest::Approx(-1.0));
    }
    SUBCASE("zero gradient and state leave parameters unchanged") {
        grads.by_name("p")(0, 0) = 0.0;
        sgd_momentum_step(params, grads, 1.0, 0.5, state);
        CHECK(params.by_name("p")(0, 0) == 0.0);
    }
    SUBCASE("two steps with momentum 0.5") {
        sgd_momentum_step(params, grads, 1.0, 0.5, state);
        CHECK(params.by_name("p")(0, 0) == doctest::Approx(-1.0));
        sgd_momentum_step(params, grads, 1.0, 0.5, state);
        CHECK(params.by_name("p")(0, 0) == doctest::Approx(-2.5));
    }
    SUBCASE("shape mismatch rejected") {
        ParamSet bad;
        bad.add("p", Matrix(2, 1, {1.0, 1.0}));
        CHECK_THROWS_AS(sgd_momentum_step(params, bad, 1.0, 0.5, state), ShapeMismatch);
    }
}

TEST_CASE("matrix construction rejects non-finite entries") {
    CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), BadSpec);
    CHECK_THROWS_AS(Matrix(1, 1, {std::numeric_limits<double>::infinity()}), BadSpec);
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), ShapeMismatch);
}
