#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mirplan/instance.hpp"
#include "mirplan/portfolio.hpp"
#include "mirplan/state_set.hpp"

namespace mirplan {

// Action of a stationary two-arm policy: mix arm `i` (above) with arm `j`
// (neg), or the deterministic selection when i == j. Terminal states carry
// the marker action.
struct PolicyAction {
    static constexpr int kTerminal = -1;
    static constexpr int kUnset = -2;

    int i = kUnset;
    int j = kUnset;

    static constexpr PolicyAction terminal() { return {kTerminal, kTerminal}; }
    static constexpr PolicyAction mix(int i, int j) { return {i, j}; }
    constexpr bool is_terminal() const { return i == kTerminal; }
    constexpr bool is_set() const { return i != kUnset; }
    constexpr bool operator==(const PolicyAction&) const = default;
};

using PolicyFn = std::function<PolicyAction(StateSet)>;

// Stationary policy materialized over the full subset lattice of K arms.
class PolicyTable {
public:
    PolicyTable() = default;
    explicit PolicyTable(int num_arms);

    int num_arms() const { return num_arms_; }
    PolicyAction at(StateSet s) const;
    void set(StateSet s, PolicyAction a) { actions_[s.bits()] = a; }
    PolicyFn as_fn() const;

    // Text round-trip: one `mask i j` record per state, mask-ascending.
    std::string serialize() const;
    static PolicyTable deserialize(const std::string& text);

private:
    int num_arms_ = 0;
    std::vector<PolicyAction> actions_;
};

// The boundary mix maximizing the probability of exploring the neg arm,
// measured relative to the instance threshold: weights
// { i: -mu~_j / (mu~_i - mu~_j), j: mu~_i / (mu~_i - mu~_j) }, or the
// singleton {i: 1} when i == j. Requires i above; j neg (or j == i).
Portfolio mix_portfolio(const Instance& instance, int i, int j);

// Terminal iff no above arm remains unobserved (MIR(s) empty, s possibly empty).
bool is_terminal(const Instance& instance, StateSet s);

// MIR with respect to prior information: support within s plus the default
// arm, and expected reward at least the threshold (within 1e-12, since the
// boundary mixes sit exactly on the constraint).
bool is_mir_prior(const Instance& instance, StateSet s, const Portfolio& p);

// Admissibility audit: p is MIR and is a boundary two-arm mix when neg(s)
// is nonempty, or a singleton above selection when neg(s) is empty.
bool is_pvalid(const Instance& instance, StateSet s, const Portfolio& p);
bool is_pvalid_action(const Instance& instance, StateSet s, PolicyAction a);

// Nature's coin flip: realized arm per p, next state drops it. Realizing the
// default arm leaves the state unchanged.
std::pair<int, StateSet> transition(StateSet s, const Portfolio& p, Rng& rng);

struct TerminalRewardMode {
    enum class Kind { ExactDiscrete, MonteCarlo };
    Kind kind = Kind::ExactDiscrete;
    std::uint64_t seed = 1;
    int samples = 100000;

    static TerminalRewardMode exact() { return {Kind::ExactDiscrete, 0, 0}; }
    static TerminalRewardMode monte_carlo(std::uint64_t seed, int samples) {
        return {Kind::MonteCarlo, seed, samples};
    }
};

// Expected terminal reward of state s: with M_e the maximum over explored
// arms and M_u over unexplored arms,
//   R(s) = thr + E[(max(M_e, M_u) - thr) * 1{M_e > thr}],
// which for a zero threshold is E[max over all arms * 1{explored max > 0}].
// Exact via independence for all-discrete instances; Monte Carlo otherwise.
double terminal_reward(const Instance& instance, StateSet s, const TerminalRewardMode& mode,
                       double* std_error = nullptr);

// Probability of exploring every arm starting from s under the policy:
// Q(pi, empty) = 1, Q(pi, terminal != empty) = 0, else the transition mix.
double q_value(const Instance& instance, const PolicyFn& policy, StateSet s);

// Q over the whole subset lattice in one ascending-mask pass. Requires the
// policy to be defined on every state; K <= 20.
std::vector<double> q_table(const Instance& instance, const PolicyFn& policy);

// Reach distribution over terminal states; probabilities sum to 1.
std::vector<std::pair<StateSet, double>> reach_probabilities(const Instance& instance,
                                                             const PolicyFn& policy, StateSet s);

// State value as the reach-probability-weighted sum of terminal rewards.
double w_value(const Instance& instance, const PolicyFn& policy, StateSet s,
               const TerminalRewardMode& mode = TerminalRewardMode::exact());

// Same value by the backward recursion W(s) = sum_a p(a) W(s \ {a}); used to
// cross-check the forward evaluator.
double w_value_backward(const Instance& instance, const PolicyFn& policy, StateSet s,
                        const TerminalRewardMode& mode = TerminalRewardMode::exact());

}  // namespace mirplan
