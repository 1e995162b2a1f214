#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mirplan/dp_oracle.hpp"
#include "mirplan/gmdp.hpp"
#include "mirplan/instance.hpp"

namespace mirplan::testing {

// Gaussian arms with means 2, 1, -1, -2 and unit variance.
inline Instance example_gaussian() {
    std::vector<RewardPrior> arms;
    arms.push_back(RewardPrior::gaussian(2.0, 1.0));
    arms.push_back(RewardPrior::gaussian(1.0, 1.0));
    arms.push_back(RewardPrior::gaussian(-1.0, 1.0));
    arms.push_back(RewardPrior::gaussian(-2.0, 1.0));
    return Instance(std::move(arms), RewardPrior::point_mass(0.0), "example-gaussian");
}

// Same means on a symmetric 21-point grid (common offsets, so the shifted
// CDFs stay dominance-ordered).
inline Instance example_gaussian_discretized(int points = 21) {
    const double sigma = 1.0;
    const double half_width = 4.0 * sigma;
    std::vector<RewardPrior> arms;
    for (double mean : {2.0, 1.0, -1.0, -2.0}) {
        std::vector<double> values, probs;
        double mass = 0.0;
        for (int g = 0; g < points; ++g) {
            const double offset = -half_width + 2.0 * half_width * g / (points - 1);
            const double z = offset / sigma;
            const double p = std::exp(-0.5 * z * z);
            values.push_back(mean + offset);
            probs.push_back(p);
            mass += p;
        }
        for (auto& p : probs) p /= mass;
        arms.push_back(RewardPrior::finite_discrete(std::move(values), std::move(probs)));
    }
    return Instance(std::move(arms), RewardPrior::point_mass(0.0), "example-grid");
}

// One above arm (mean 0.2) and one neg arm (mean -0.4) on {-1, 1}.
inline Instance two_arm_two_point() {
    std::vector<RewardPrior> arms;
    arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.6));
    arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.3));
    return Instance(std::move(arms), RewardPrior::point_mass(0.0), "two-arm");
}

// Three arms: a modest above arm, a barely-negative arm with a huge upside,
// and a dominated arm with the same upside but an astronomically bad
// downside.
inline Instance nonmonotone_w_instance(double eps = 0.01) {
    std::vector<RewardPrior> arms;
    arms.push_back(RewardPrior::finite_discrete({-1.0, 1.0}, {0.45, 0.55}));
    arms.push_back(RewardPrior::finite_discrete({-1e6 - 2.0 * eps, 1e6}, {0.5, 0.5}));
    arms.push_back(
        RewardPrior::finite_discrete({-std::pow(10.0, 1.0 / eps), 1e6}, {0.5, 0.5}));
    return Instance(std::move(arms), RewardPrior::point_mass(0.0), "nonmonotone-w");
}

// Enumerates the joint atom assignment of all arms; calls fn(values, prob).
inline void enumerate_joint(const Instance& instance,
                            const std::function<void(const std::vector<double>&, double)>& fn) {
    const int k = instance.num_arms();
    std::vector<double> values(static_cast<std::size_t>(k));
    std::function<void(int, double)> rec = [&](int arm, double prob) {
        if (arm == k) {
            fn(values, prob);
            return;
        }
        for (const auto& [v, p] : instance.arm(arm).atoms()) {
            values[static_cast<std::size_t>(arm)] = v;
            rec(arm + 1, prob * p);
        }
    };
    rec(0, 1.0);
}

// Brute-force terminal reward by full joint enumeration; independent of the
// CDF-product evaluator.
inline double oracle_terminal_reward(const Instance& instance, StateSet s) {
    const double thr = instance.threshold();
    double acc = 0.0;
    enumerate_joint(instance, [&](const std::vector<double>& values, double prob) {
        double max_all = -1e308, max_explored = -1e308;
        for (int i = 0; i < instance.num_arms(); ++i) {
            max_all = std::max(max_all, values[static_cast<std::size_t>(i)]);
            if (!s.contains(i)) max_explored = std::max(max_explored, values[static_cast<std::size_t>(i)]);
        }
        acc += prob * (max_explored > thr ? std::max(max_all, thr) : thr);
    });
    return acc;
}

// Brute-force Q by un-memoized path enumeration with weights recomputed from
// first principles.
inline double oracle_q(const Instance& instance, const PolicyFn& policy, StateSet s) {
    if (s.empty()) return 1.0;
    const PolicyAction a = policy(s);
    if (a.is_terminal()) return 0.0;
    if (a.i == a.j) return oracle_q(instance, policy, s.without(a.i));
    const double mi = instance.offset_mean(a.i);
    const double mj = instance.offset_mean(a.j);
    const double wi = -mj / (mi - mj);
    const double wj = mi / (mi - mj);
    return wi * oracle_q(instance, policy, s.without(a.i)) +
           wj * oracle_q(instance, policy, s.without(a.j));
}

// Brute-force W by path enumeration over the joint-enumeration rewards.
inline double oracle_w(const Instance& instance, const PolicyFn& policy, StateSet s) {
    const PolicyAction a = policy(s);
    if (a.is_terminal()) return oracle_terminal_reward(instance, s);
    if (a.i == a.j) return oracle_w(instance, policy, s.without(a.i));
    const double mi = instance.offset_mean(a.i);
    const double mj = instance.offset_mean(a.j);
    const double wi = -mj / (mi - mj);
    const double wj = mi / (mi - mj);
    return wi * oracle_w(instance, policy, s.without(a.i)) +
           wj * oracle_w(instance, policy, s.without(a.j));
}

// |observed/n - p| within z binomial standard deviations.
inline bool within_binomial_band(long long observed, long long n, double p, double z = 3.0) {
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return std::abs(static_cast<double>(observed) / static_cast<double>(n) - p) <= z * sd;
}

}  // namespace mirplan::testing
