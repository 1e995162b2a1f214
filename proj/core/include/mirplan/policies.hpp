#pragma once

#include <cstdint>
#include <vector>

#include "mirplan/gmdp.hpp"
#include "mirplan/instance.hpp"

namespace mirplan {

// The index policy: terminal marker on terminal states; otherwise mix the
// lowest-index above arm with the highest-mean unobserved neg arm (ties by
// lowest index), or select it alone when no neg arms remain.
class OgpPolicy {
public:
    explicit OgpPolicy(const Instance& instance);

    PolicyAction action(StateSet s) const;
    PolicyFn as_fn() const {
        return [this](StateSet s) { return action(s); };
    }

    // Neg arm indices sorted by decreasing mean, then increasing index.
    const std::vector<int>& neg_by_mean() const { return neg_sorted_; }

private:
    const Instance* instance_;
    std::vector<int> neg_sorted_;
};

// Incremental play-out engine for large K: one O(K log K) construction sort,
// then O(1) amortized work per decision along a play-out. Reveals from any
// source (the play-out itself or an outer mechanism) advance the cursors.
class OgpPlayoutEngine {
public:
    struct Stats {
        std::uint64_t queries = 0;
        std::uint64_t structure_ops = 0;  // cursor advances + skip checks
    };

    // Means measured relative to an arbitrary threshold; above iff offset > 0.
    OgpPlayoutEngine(std::vector<double> offset_means, bool singleton_by_mean = false);

    bool terminal() const { return above_cursor_ >= above_sorted_.size(); }
    // Current action; valid only when not terminal.
    PolicyAction current_action();
    // Portfolio weights of the current action.
    void current_weights(double* weight_i, double* weight_j) const;
    void mark_explored(int arm);

    int num_arms() const { return static_cast<int>(offset_means_.size()); }
    double offset_mean(int arm) const { return offset_means_[static_cast<std::size_t>(arm)]; }
    bool explored(int arm) const { return explored_[static_cast<std::size_t>(arm)] != 0; }
    const Stats& stats() const { return stats_; }

private:
    void skip_explored();

    std::vector<double> offset_means_;
    std::vector<int> above_sorted_;  // index ascending, or mean descending
    std::vector<int> neg_sorted_;    // mean descending, index ascending
    std::vector<char> explored_;
    std::size_t above_cursor_ = 0;
    std::size_t neg_cursor_ = 0;
    Stats stats_;
};

// Right/left-ordered policy from explicit priority permutations over
// above(A) and neg(A) (lower rank explored first). Defined on off-path
// states as well.
class OrderedPolicy {
public:
    OrderedPolicy(const Instance& instance, std::vector<int> sigma_left,
                  std::vector<int> sigma_right);

    PolicyAction action(StateSet s) const;
    PolicyFn as_fn() const {
        return [this](StateSet s) { return action(s); };
    }

private:
    const Instance* instance_;
    std::vector<int> left_order_;   // above arms, priority order
    std::vector<int> right_order_;  // neg arms, priority order
};

// Uniformly random admissible two-arm action per non-terminal state;
// deterministic given the seed. K <= 20.
PolicyTable random_pvalid(const Instance& instance, std::uint64_t seed);

// Experimental exploration index
//   f^U(a_j) = Pr(X_j > thr) E[max_{l in U} X_l | X_j > thr] / |mu~_j|,
// with the max over the full current state's arms. Discrete priors only.
double conjecture_index_value(const Instance& instance, StateSet s, int j);
PolicyAction conjecture_index_action(const Instance& instance, StateSet s);

}  // namespace mirplan
