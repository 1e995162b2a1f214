#include "mirplan/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mirplan {

namespace {

std::vector<int> sort_by_mean_desc(const Instance& instance, std::span<const int> arms) {
    std::vector<int> sorted(arms.begin(), arms.end());
    std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        if (instance.arm_mean(a) != instance.arm_mean(b))
            return instance.arm_mean(a) > instance.arm_mean(b);
        return a < b;
    });
    return sorted;
}

}  // namespace

OgpPolicy::OgpPolicy(const Instance& instance)
    : instance_(&instance), neg_sorted_(sort_by_mean_desc(instance, instance.neg())) {}

PolicyAction OgpPolicy::action(StateSet s) const {
    int above = -1;
    for (int i : instance_->above()) {
        if (s.contains(i)) {
            above = i;
            break;
        }
    }
    if (above < 0) return PolicyAction::terminal();
    for (int j : neg_sorted_)
        if (s.contains(j)) return PolicyAction::mix(above, j);
    return PolicyAction::mix(above, above);
}

OgpPlayoutEngine::OgpPlayoutEngine(std::vector<double> offset_means, bool singleton_by_mean)
    : offset_means_(std::move(offset_means)),
      explored_(offset_means_.size(), 0) {
    const int k = num_arms();
    std::vector<int> above, neg;
    for (int i = 0; i < k; ++i) (offset_means_[static_cast<std::size_t>(i)] > 0.0 ? above : neg).push_back(i);
    const auto mean_desc = [this](int a, int b) {
        const double ma = offset_means_[static_cast<std::size_t>(a)];
        const double mb = offset_means_[static_cast<std::size_t>(b)];
        if (ma != mb) return ma > mb;
        return a < b;
    };
    if (singleton_by_mean) std::sort(above.begin(), above.end(), mean_desc);
    // else: already index-ascending, the deterministic "pick any" rule
    std::sort(neg.begin(), neg.end(), mean_desc);
    above_sorted_ = std::move(above);
    neg_sorted_ = std::move(neg);
}

void OgpPlayoutEngine::skip_explored() {
    while (above_cursor_ < above_sorted_.size() &&
           explored_[static_cast<std::size_t>(above_sorted_[above_cursor_])]) {
        ++above_cursor_;
        ++stats_.structure_ops;
    }
    while (neg_cursor_ < neg_sorted_.size() &&
           explored_[static_cast<std::size_t>(neg_sorted_[neg_cursor_])]) {
        ++neg_cursor_;
        ++stats_.structure_ops;
    }
}

PolicyAction OgpPlayoutEngine::current_action() {
    ++stats_.queries;
    ++stats_.structure_ops;
    skip_explored();
    if (terminal()) return PolicyAction::terminal();
    const int i = above_sorted_[above_cursor_];
    if (neg_cursor_ >= neg_sorted_.size()) return PolicyAction::mix(i, i);
    return PolicyAction::mix(i, neg_sorted_[neg_cursor_]);
}

void OgpPlayoutEngine::current_weights(double* weight_i, double* weight_j) const {
    const int i = above_sorted_[above_cursor_];
    if (neg_cursor_ >= neg_sorted_.size()) {
        *weight_i = 1.0;
        *weight_j = 0.0;
        return;
    }
    const int j = neg_sorted_[neg_cursor_];
    const double mi = offset_means_[static_cast<std::size_t>(i)];
    const double mj = offset_means_[static_cast<std::size_t>(j)];
    *weight_i = -mj / (mi - mj);
    *weight_j = mi / (mi - mj);
}

void OgpPlayoutEngine::mark_explored(int arm) {
    explored_[static_cast<std::size_t>(arm)] = 1;
    ++stats_.structure_ops;
    skip_explored();  // keeps terminal() accurate without a query
}

OrderedPolicy::OrderedPolicy(const Instance& instance, std::vector<int> sigma_left,
                             std::vector<int> sigma_right)
    : instance_(&instance), left_order_(std::move(sigma_left)), right_order_(std::move(sigma_right)) {
    const auto is_permutation_of = [](const std::vector<int>& order, std::span<const int> arms) {
        if (order.size() != arms.size()) return false;
        std::vector<int> a(order), b(arms.begin(), arms.end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return a == b;
    };
    if (!is_permutation_of(left_order_, instance.above()))
        throw std::invalid_argument("ordered policy: sigma_left must be a bijection on above(A)");
    if (!is_permutation_of(right_order_, instance.neg()))
        throw std::invalid_argument("ordered policy: sigma_right must be a bijection on neg(A)");
}

PolicyAction OrderedPolicy::action(StateSet s) const {
    int above = -1;
    for (int i : left_order_) {
        if (s.contains(i)) {
            above = i;
            break;
        }
    }
    if (above < 0) return PolicyAction::terminal();
    for (int j : right_order_)
        if (s.contains(j)) return PolicyAction::mix(above, j);
    return PolicyAction::mix(above, above);
}

PolicyTable random_pvalid(const Instance& instance, std::uint64_t seed) {
    const int k = instance.num_arms();
    PolicyTable table(k);
    const std::uint64_t n = std::uint64_t{1} << k;
    std::vector<std::pair<int, int>> pairs;
    for (std::uint64_t mask = 0; mask < n; ++mask) {
        const StateSet s(mask);
        if (is_terminal(instance, s)) {
            table.set(s, PolicyAction::terminal());
            continue;
        }
        pairs.clear();
        bool has_neg = false;
        for (int j : instance.neg())
            if (s.contains(j)) {
                has_neg = true;
                break;
            }
        for (int i : instance.above()) {
            if (!s.contains(i)) continue;
            if (!has_neg) {
                pairs.emplace_back(i, i);
            } else {
                for (int j : instance.neg())
                    if (s.contains(j)) pairs.emplace_back(i, j);
            }
        }
        // Per-state stream keyed on the mask: the draw is independent of the
        // iteration order over states.
        Rng rng = Rng::derive(seed, mask);
        const auto& pick = pairs[rng.below(pairs.size())];
        table.set(s, PolicyAction::mix(pick.first, pick.second));
    }
    return table;
}

namespace {

// E[max_{l in members} X_l | X_j > thr], exact over merged atoms.
double conditional_max_expectation(const Instance& instance, StateSet s, int j) {
    const double thr = instance.threshold();
    const double p_pos = instance.arm(j).prob_above(thr);
    if (p_pos <= 0.0) return thr;  // conditioning event is empty; index is 0 anyway
    std::vector<double> grid;
    for (int l = 0; l < instance.num_arms(); ++l) {
        if (!s.contains(l)) continue;
        for (const auto& [v, p] : instance.arm(l).atoms()) grid.push_back(v);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto cond_cdf = [&](double x) {
        // CDF of the max with X_j restricted to (thr, inf) and renormalized.
        double f = x >= thr ? std::max(0.0, instance.arm(j).cdf(x) - instance.arm(j).cdf(thr)) / p_pos
                            : 0.0;
        for (int l = 0; l < instance.num_arms(); ++l) {
            if (!s.contains(l) || l == j) continue;
            f *= instance.arm(l).cdf(x);
        }
        return f;
    };

    double expectation = 0.0, prev = 0.0;
    for (double z : grid) {
        const double f = cond_cdf(z);
        expectation += z * (f - prev);
        prev = f;
    }
    return expectation;
}

}  // namespace

double conjecture_index_value(const Instance& instance, StateSet s, int j) {
    if (!instance.all_discrete())
        throw std::invalid_argument("conjecture index: discrete priors required");
    const double thr = instance.threshold();
    const double p_pos = instance.arm(j).prob_above(thr);
    if (p_pos <= 0.0) return 0.0;
    const double cond_max = conditional_max_expectation(instance, s, j);
    return p_pos * (cond_max - thr) / std::abs(instance.offset_mean(j));
}

PolicyAction conjecture_index_action(const Instance& instance, StateSet s) {
    int above = -1;
    for (int i : instance.above())
        if (s.contains(i)) {
            above = i;
            break;
        }
    if (above < 0) return PolicyAction::terminal();
    int best_j = -1;
    double best_f = -std::numeric_limits<double>::infinity();
    for (int j : instance.neg()) {
        if (!s.contains(j)) continue;
        const double f = conjecture_index_value(instance, s, j);
        if (f > best_f) {
            best_f = f;
            best_j = j;
        }
    }
    if (best_j < 0) return PolicyAction::mix(above, above);
    return PolicyAction::mix(above, best_j);
}

}  // namespace mirplan
