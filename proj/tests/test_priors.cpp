#include <cmath>

#include "doctest.h"
#include "mirplan/instance.hpp"
#include "mirplan/priors.hpp"
#include "support.hpp"

using namespace mirplan;

TEST_CASE("analytic means") {
    CHECK(RewardPrior::gaussian(2.0, 1.0).mean() == 2.0);
    CHECK(RewardPrior::point_mass(0.0).mean() == 0.0);
    CHECK(RewardPrior::two_point(-1.0, 1.0, 0.6).mean() == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("cdf is right-continuous and hits the examples") {
    CHECK(RewardPrior::point_mass(0.0).cdf(-0.5) == 0.0);
    CHECK(RewardPrior::point_mass(0.0).cdf(0.0) == 1.0);
    CHECK(RewardPrior::two_point(-1.0, 1.0, 0.6).cdf(0.0) == doctest::Approx(0.4));
    CHECK(RewardPrior::gaussian(0.0, 1.0).cdf(0.0) == doctest::Approx(0.5));
}

TEST_CASE("prob_positive") {
    CHECK(RewardPrior::two_point(-1.0, 1.0, 0.3).prob_positive() == doctest::Approx(0.3));
    CHECK(RewardPrior::point_mass(0.0).prob_positive() == 0.0);
    CHECK(RewardPrior::gaussian(-1.0, 1.0).prob_positive() ==
          doctest::Approx(0.15865525393145707).epsilon(1e-9));
}

TEST_CASE("construction rejects malformed families") {
    CHECK_THROWS_AS(RewardPrior::two_point(1.0, 2.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(RewardPrior::two_point(-1.0, -0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(RewardPrior::finite_discrete({1.0, 0.5}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(RewardPrior::finite_discrete({0.0, 1.0}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(RewardPrior::finite_discrete({0.0, 1.0}, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(RewardPrior::gaussian(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("sampling matches the distribution") {
    SUBCASE("point mass is constant") {
        Rng rng(123);
        const auto pm = RewardPrior::point_mass(3.0);
        for (int i = 0; i < 100; ++i) CHECK(pm.sample(rng) == 3.0);
    }
    SUBCASE("two-point positive frequency inside the 3-sigma band") {
        const double p = 0.37;
        const auto tp = RewardPrior::two_point(-1.0, 1.0, p);
        Rng rng(7);
        const long long n = 1000000;
        long long hits = 0;
        for (long long i = 0; i < n; ++i)
            if (tp.sample(rng) > 0.0) ++hits;
        CHECK(testing::within_binomial_band(hits, n, p));
    }
    SUBCASE("gaussian sample mean inside the CLT band") {
        const double mu = 1.5, sigma = 2.0;
        const auto g = RewardPrior::gaussian(mu, sigma);
        Rng rng(11);
        const long long n = 1000000;
        double sum = 0.0;
        for (long long i = 0; i < n; ++i) sum += g.sample(rng);
        CHECK(std::abs(sum / n - mu) <= 4.0 * sigma / 1000.0);
    }
}

TEST_CASE("mean agrees with an independent quadrature") {
    SUBCASE("discrete") {
        const auto fd = RewardPrior::finite_discrete({-2.0, 0.5, 1.0}, {0.5, 0.2, 0.3});
        double integral = 0.0;
        for (const auto& [v, p] : fd.atoms()) integral += v * p;
        CHECK(std::abs(fd.mean() - integral) <= 1e-9);
    }
    SUBCASE("gaussian via Simpson") {
        const double mu = 0.7, sigma = 1.3;
        const auto g = RewardPrior::gaussian(mu, sigma);
        const double lo = mu - 10.0 * sigma, hi = mu + 10.0 * sigma;
        const int n = 20000;  // even
        const double h = (hi - lo) / n;
        const auto density = [&](double x) {
            const double z = (x - mu) / sigma;
            return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
        };
        double integral = lo * density(lo) + hi * density(hi);
        for (int i = 1; i < n; ++i) {
            const double x = lo + i * h;
            integral += (i % 2 == 1 ? 4.0 : 2.0) * x * density(x);
        }
        integral *= h / 3.0;
        CHECK(std::abs(g.mean() - integral) <= 1e-6);
    }
}

TEST_CASE("cdf is monotone with limits 0 and 1") {
    const auto check_grid = [](const RewardPrior& prior) {
        double previous = -0.1;
        for (int i = 0; i <= 200; ++i) {
            const double x = -10.0 + 0.1 * i;
            const double f = prior.cdf(x);
            CHECK(f >= previous - 1e-15);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
            previous = f;
        }
        CHECK(prior.cdf(-1e9) == 0.0);
        CHECK(prior.cdf(1e9) == 1.0);
    };
    check_grid(RewardPrior::two_point(-1.0, 1.0, 0.25));
    check_grid(RewardPrior::finite_discrete({-3.0, -1.0, 2.0, 5.0}, {0.1, 0.4, 0.3, 0.2}));
    check_grid(RewardPrior::gaussian(0.5, 2.0));
}

TEST_CASE("first-order dominance") {
    const auto g1 = RewardPrior::gaussian(-1.0, 1.0);
    const auto g2 = RewardPrior::gaussian(-2.0, 1.0);
    CHECK(dominates(g1, g2) == Tristate::True);
    CHECK(dominates(g2, g1) == Tristate::False);
    CHECK(dominates(g1, g1) == Tristate::True);

    const auto fd1 = RewardPrior::finite_discrete({-1.0, 1.0}, {0.45, 0.55});
    const auto fd2 = RewardPrior::finite_discrete({-2.0, 1.0}, {0.5, 0.5});
    CHECK(dominates(fd1, fd2) == Tristate::True);
    CHECK(dominates(fd1, fd1) == Tristate::True);

    // Crossing CDFs: neither direction dominates.
    const auto a = RewardPrior::finite_discrete({-3.0, 1.0}, {0.3, 0.7});
    const auto b = RewardPrior::finite_discrete({-1.0, 0.5}, {0.5, 0.5});
    CHECK(dominates(a, b) == Tristate::False);
    CHECK(dominates(b, a) == Tristate::False);

    // Unequal-variance Gaussians cross exactly once.
    CHECK(dominates(RewardPrior::gaussian(0.0, 1.0), RewardPrior::gaussian(-1.0, 2.0)) ==
          Tristate::False);

    CHECK(dominates(g1, fd1) == Tristate::Undecidable);
    CHECK(dominates(fd1, g1) == Tristate::Undecidable);
}

TEST_CASE("instance construction and partitions") {
    Instance instance = testing::example_gaussian();
    CHECK(instance.num_arms() == 4);
    CHECK(instance.threshold() == 0.0);
    CHECK(std::vector<int>(instance.above().begin(), instance.above().end()) ==
          std::vector<int>{0, 1});
    CHECK(std::vector<int>(instance.neg().begin(), instance.neg().end()) ==
          std::vector<int>{2, 3});

    std::vector<RewardPrior> arms;
    arms.push_back(RewardPrior::gaussian(5e-10, 1.0));
    CHECK_THROWS_AS(Instance(std::move(arms), RewardPrior::point_mass(0.0)),
                    std::invalid_argument);
}

TEST_CASE("generated instances satisfy the stochastic-order postconditions") {
    SUBCASE("gaussian template") {
        Rng rng(42);
        Instance instance = generate_instance(4, GaussianTemplate{}, rng);
        CHECK(instance.num_arms() == 4);
        CHECK(instance.neg_arms_stochastically_ordered());
    }
    SUBCASE("single arm") {
        Rng rng(5);
        Instance instance = generate_instance(1, GaussianTemplate{}, rng);
        CHECK(instance.above().size() + instance.neg().size() == 1);
    }
    SUBCASE("two-point template gives a total order") {
        Rng rng(9);
        Instance instance = generate_instance(10, TwoPointTemplate{}, rng);
        CHECK(instance.arms_totally_ordered());
        bool has_above = false;
        for (int i = 0; i < instance.num_arms(); ++i) has_above |= instance.is_above(i);
        CHECK(has_above);
    }
    SUBCASE("discrete mixture template") {
        Rng rng(17);
        for (int it = 0; it < 20; ++it) {
            Instance instance = generate_instance(6, DiscreteMixtureTemplate{}, rng);
            CHECK(instance.neg_arms_stochastically_ordered());
        }
    }
}
