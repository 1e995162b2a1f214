#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mirplan/rng.hpp"

namespace mirplan {

// Arm index used for the default arm inside portfolios and traces.
inline constexpr int kDefaultArm = -1;

// Sparse probability vector over arms plus the default arm. Entries are kept
// sorted by arm index with strictly positive weights.
class Portfolio {
public:
    Portfolio() = default;

    static Portfolio singleton(int arm) {
        Portfolio p;
        p.entries_.emplace_back(arm, 1.0);
        return p;
    }

    static Portfolio pair(int arm_a, double weight_a, int arm_b, double weight_b) {
        Portfolio p;
        if (std::abs(weight_a + weight_b - 1.0) > 1e-12)
            throw std::invalid_argument("portfolio weights must sum to 1");
        if (weight_a < -1e-15 || weight_b < -1e-15)
            throw std::invalid_argument("portfolio weights must be nonnegative");
        if (arm_a == arm_b) throw std::invalid_argument("portfolio arms must differ");
        if (arm_a > arm_b) {
            std::swap(arm_a, arm_b);
            std::swap(weight_a, weight_b);
        }
        if (weight_a > 0.0) p.entries_.emplace_back(arm_a, weight_a);
        if (weight_b > 0.0) p.entries_.emplace_back(arm_b, weight_b);
        return p;
    }

    const std::vector<std::pair<int, double>>& entries() const { return entries_; }

    double weight(int arm) const {
        for (const auto& [a, w] : entries_)
            if (a == arm) return w;
        return 0.0;
    }

    int sample(Rng& rng) const {
        double u = rng.uniform01();
        for (const auto& [a, w] : entries_) {
            if (u < w) return a;
            u -= w;
        }
        return entries_.back().first;
    }

    std::size_t support_size() const { return entries_.size(); }

private:
    std::vector<std::pair<int, double>> entries_;
};

}  // namespace mirplan
