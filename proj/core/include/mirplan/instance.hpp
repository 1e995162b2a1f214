#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mirplan/priors.hpp"
#include "mirplan/rng.hpp"

namespace mirplan {

// Immutable problem description: K arms plus the default arm. The MIR
// comparison threshold is the default arm's prior mean; the above/neg
// partition is derived from it at construction.
class Instance {
public:
    Instance(std::vector<RewardPrior> arms, RewardPrior default_arm,
             std::string name = "instance");

    int num_arms() const { return static_cast<int>(arms_.size()); }
    const RewardPrior& arm(int i) const { return arms_[static_cast<std::size_t>(i)]; }
    const RewardPrior& default_arm() const { return default_arm_; }
    const std::string& name() const { return name_; }

    double threshold() const { return threshold_; }
    double arm_mean(int i) const { return means_[static_cast<std::size_t>(i)]; }
    // Mean relative to the threshold; strictly nonzero by construction.
    double offset_mean(int i) const { return means_[static_cast<std::size_t>(i)] - threshold_; }

    bool is_above(int i) const { return offset_mean(i) > 0.0; }
    std::span<const int> above() const { return above_; }
    std::span<const int> neg() const { return neg_; }

    bool all_discrete() const;
    // Largest support bound over arms and default; absent if any is unbounded.
    std::optional<double> support_bound() const;

    // Every pair of neg arms comparable under first-order dominance,
    // consistently with the mean order (Assumption 1 as checkable predicate).
    bool neg_arms_stochastically_ordered() const;
    // Total dominance order over all arms; sufficient for any realized
    // threshold partition (used by the strategic-agents mechanism).
    bool arms_totally_ordered() const;

private:
    std::vector<RewardPrior> arms_;
    RewardPrior default_arm_;
    std::string name_;
    double threshold_;
    std::vector<double> means_;
    std::vector<int> above_, neg_;
};

// Family templates for random instance generation. Each template yields a
// stochastically ordered family so that generated neg arms are totally
// ordered by dominance.
struct GaussianTemplate {
    double sigma = 1.0;
    double mean_lo = -3.0;
    double mean_hi = 3.0;
};
struct TwoPointTemplate {
    double lo = -1.0;
    double hi = 1.0;
};
// Mixtures lambda * low + (1 - lambda) * high of two fixed atom vectors on a
// common support; dominance is monotone in lambda.
struct DiscreteMixtureTemplate {
    std::vector<double> support{-2.0, -0.5, 0.5, 2.0};
    std::vector<double> p_low{0.55, 0.3, 0.1, 0.05};
    std::vector<double> p_high{0.05, 0.1, 0.3, 0.55};
};
using FamilyTemplate = std::variant<GaussianTemplate, TwoPointTemplate, DiscreteMixtureTemplate>;

// Random instance with a PointMass(0) default. Ensures at least one above
// arm for K >= 2; a single-arm instance may fall on either side. Throws
// after bounded retries if the template cannot produce a valid instance.
Instance generate_instance(int num_arms, const FamilyTemplate& family_template, Rng& rng);

FamilyTemplate family_template_by_name(const std::string& name);

}  // namespace mirplan
