#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mirplan/instance.hpp"
#include "mirplan/policies.hpp"
#include "mirplan/portfolio.hpp"

namespace mirplan {

// Everything the mechanism has observed: realized values are static, so a
// revealed arm's conditional mean is its value forever after.
class InformationSet {
public:
    explicit InformationSet(const Instance& instance)
        : instance_(&instance), values_(static_cast<std::size_t>(instance.num_arms())) {}

    bool known(int arm) const {
        return arm == kDefaultArm ? default_value_.has_value()
                                  : values_[static_cast<std::size_t>(arm)].has_value();
    }
    double value(int arm) const {
        return arm == kDefaultArm ? *default_value_ : *values_[static_cast<std::size_t>(arm)];
    }
    double conditional_mean(int arm) const {
        if (arm == kDefaultArm)
            return default_value_ ? *default_value_ : instance_->threshold();
        const auto& v = values_[static_cast<std::size_t>(arm)];
        return v ? *v : instance_->arm_mean(arm);
    }
    void reveal(int arm, double value) {
        if (arm == kDefaultArm) {
            if (!default_value_) default_value_ = value;
            return;
        }
        auto& slot = values_[static_cast<std::size_t>(arm)];
        if (!slot) slot = value;
    }
    int round() const { return round_; }
    void advance_round() { ++round_; }

private:
    const Instance* instance_;
    std::vector<std::optional<double>> values_;
    std::optional<double> default_value_;
    int round_ = 0;
};

enum class Phase { OgpExploration, BernoulliTrial, ExploitBest, ExploitDefault };
const char* phase_label(Phase phase);

struct Round {
    int t = 0;
    Portfolio portfolio;
    int arm = kDefaultArm;  // realized recommendation
    double reward = 0.0;
    Phase phase = Phase::OgpExploration;
    // sum_a p(a) E[X(a)|I_t] - E[X(a0)|I_t]; nonnegative up to rounding for
    // every MIR portfolio.
    double certificate = 0.0;
};

struct SimTrace {
    std::vector<Round> rounds;
    int horizon = 0;
    double total_reward = 0.0;
    double welfare() const { return horizon > 0 ? total_reward / horizon : 0.0; }
};

// The trial mix of a known-positive value with an unexplored below-threshold
// arm; information-conditioned expected value exactly at the threshold.
Portfolio bernoulli_trial_portfolio(const Instance& instance, int best_arm, double x_best, int j);

// Mechanism engine: index-policy exploration to a terminal state, then
// Bernoulli trials to full exploration when a positive offset was realized,
// then exploitation. The TwoSupported variant exploits on the first realized
// high value and never runs trials.
class IregbEngine {
public:
    enum class Variant { Standard, TwoSupported };

    IregbEngine(const Instance& instance, double threshold, Variant variant = Variant::Standard);
    explicit IregbEngine(const Instance& instance)
        : IregbEngine(instance, instance.threshold(), Variant::Standard) {}

    struct Step {
        Portfolio portfolio;
        Phase phase;
    };
    Step next();
    void reveal(int arm, double value);
    bool exploiting();
    double threshold() const { return threshold_; }
    int exploit_arm();  // best revealed arm, or kDefaultArm
    const OgpPlayoutEngine& playout() const { return playout_; }

private:
    bool positive_found() const { return best_arm_ >= 0 && best_value_ > threshold_; }
    int next_trial_target();
    Portfolio trial_portfolio(int target) const;

    const Instance* instance_;
    double threshold_;
    Variant variant_;
    OgpPlayoutEngine playout_;
    std::vector<int> trial_order_;  // below-threshold arms, decreasing prior mean
    std::size_t trial_cursor_ = 0;
    int explored_count_ = 0;
    int best_arm_ = -1;
    double best_value_ = 0.0;
    int trial_anchor_ = -1;  // frozen when trials begin
    double trial_anchor_value_ = 0.0;
};

enum class Mechanism { Iregb, IregbPrime, BicIregb };
Mechanism mechanism_by_name(const std::string& name);
const char* mechanism_name(Mechanism mech);

SimTrace run_iregb(const Instance& instance, int horizon, Rng& rng);
// Requires all arm priors two-point on a common support pair.
SimTrace run_iregb_prime(const Instance& instance, int horizon, Rng& rng);

// Average per-round reward of one run; exploitation tails are accumulated
// analytically, so the cost is proportional to the exploration length.
double run_welfare(const Instance& instance, Mechanism mech, int horizon, Rng& rng);

struct WelfareEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long replications = 0;
};

// Independent replications on derived seeds; deterministic given `seed`
// regardless of the thread count.
WelfareEstimate estimate_welfare(const Instance& instance, Mechanism mech, int horizon,
                                 long long replications, std::uint64_t seed, int threads = 0);

// The finite-horizon guarantee (1 - K(1 + eta E[1/delta]) / T) * w_star with
// E[1/delta] exact over the discrete above-arm joint, conditioned on at
// least one positive offset. Requires bounded discrete priors.
double convergence_bound(const Instance& instance, int horizon);

// Exact E[1/delta | delta exists]; exposed for the bound diagnostics.
double expected_inverse_delta(const Instance& instance);
double neg_mean_magnitude(const Instance& instance);  // eta

}  // namespace mirplan
