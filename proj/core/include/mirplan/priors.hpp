#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mirplan/rng.hpp"

namespace mirplan {

struct PointMass {
    double value;
};

// Two-point distribution on {lo, hi} with lo < 0 < hi.
struct TwoPoint {
    double lo;
    double hi;
    double p_hi;
};

// Atoms with strictly increasing values and strictly positive probabilities.
struct FiniteDiscrete {
    std::vector<double> values;
    std::vector<double> probs;
};

struct GaussianCommonVar {
    double mean;
    double sigma;
};

enum class Tristate { False, True, Undecidable };

// One-dimensional reward distribution. Immutable after construction.
class RewardPrior {
public:
    using Family = std::variant<PointMass, TwoPoint, FiniteDiscrete, GaussianCommonVar>;

    static RewardPrior point_mass(double value);
    static RewardPrior two_point(double lo, double hi, double p_hi);
    static RewardPrior finite_discrete(std::vector<double> values, std::vector<double> probs);
    static RewardPrior gaussian(double mean, double sigma);

    double mean() const { return mean_; }

    // Pr(X <= x), right-continuous.
    double cdf(double x) const;
    // Pr(X < x). Needed by the strict-inequality quantities of the BIC machinery.
    double cdf_strict(double x) const;
    double prob_positive() const { return 1.0 - cdf(0.0); }
    double prob_above(double threshold) const { return 1.0 - cdf(threshold); }

    double sample(Rng& rng) const;

    bool is_discrete() const { return !std::holds_alternative<GaussianCommonVar>(family_); }
    // H with Pr(|X| <= H) = 1; absent for the Gaussian family.
    std::optional<double> support_bound() const { return support_bound_; }

    // Atom list (value, prob) for discrete families; throws for Gaussian.
    const std::vector<std::pair<double, double>>& atoms() const;

    const Family& family() const { return family_; }
    std::string describe() const;

private:
    RewardPrior(Family family, double mean, std::optional<double> bound,
                std::vector<std::pair<double, double>> atoms)
        : family_(std::move(family)),
          mean_(mean),
          support_bound_(bound),
          atoms_(std::move(atoms)) {}

    Family family_;
    double mean_;
    std::optional<double> support_bound_;
    std::vector<std::pair<double, double>> atoms_;  // empty for Gaussian
};

// First-order stochastic dominance: does p dominate q?
// Exact for discrete/discrete and Gaussian/Gaussian pairs; pairs mixing a
// bounded family with the Gaussian are reported Undecidable rather than
// approximated.
Tristate dominates(const RewardPrior& p, const RewardPrior& q);

}  // namespace mirplan
