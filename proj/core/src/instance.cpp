#include "mirplan/instance.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mirplan {

namespace {
// Arms whose mean coincides with the threshold make the mix weights of
// Eq-style portfolios ill-conditioned; reject them at construction.
constexpr double kMeanExclusionTol = 1e-9;
}  // namespace

Instance::Instance(std::vector<RewardPrior> arms, RewardPrior default_arm, std::string name)
    : arms_(std::move(arms)), default_arm_(std::move(default_arm)), name_(std::move(name)) {
    if (arms_.empty()) throw std::invalid_argument("instance requires at least one arm");
    threshold_ = default_arm_.mean();
    means_.reserve(arms_.size());
    for (int i = 0; i < num_arms(); ++i) {
        const double mu = arms_[static_cast<std::size_t>(i)].mean();
        means_.push_back(mu);
        const double offset = mu - threshold_;
        if (std::abs(offset) < kMeanExclusionTol) {
            std::ostringstream os;
            os << "arm " << i << " has mean within " << kMeanExclusionTol
               << " of the default threshold " << threshold_;
            throw std::invalid_argument(os.str());
        }
        (offset > 0.0 ? above_ : neg_).push_back(i);
    }
}

bool Instance::all_discrete() const {
    for (const auto& a : arms_)
        if (!a.is_discrete()) return false;
    return default_arm_.is_discrete();
}

std::optional<double> Instance::support_bound() const {
    double h = 0.0;
    for (const auto& a : arms_) {
        const auto b = a.support_bound();
        if (!b) return std::nullopt;
        h = std::max(h, *b);
    }
    const auto b0 = default_arm_.support_bound();
    if (!b0) return std::nullopt;
    return std::max(h, *b0);
}

bool Instance::neg_arms_stochastically_ordered() const {
    for (std::size_t a = 0; a < neg_.size(); ++a) {
        for (std::size_t b = a + 1; b < neg_.size(); ++b) {
            const int i = neg_[a], j = neg_[b];
            const int hi = arm_mean(i) >= arm_mean(j) ? i : j;
            const int lo = hi == i ? j : i;
            if (dominates(arm(hi), arm(lo)) != Tristate::True) return false;
        }
    }
    return true;
}

bool Instance::arms_totally_ordered() const {
    for (int i = 0; i < num_arms(); ++i) {
        for (int j = i + 1; j < num_arms(); ++j) {
            const int hi = arm_mean(i) >= arm_mean(j) ? i : j;
            const int lo = hi == i ? j : i;
            if (dominates(arm(hi), arm(lo)) != Tristate::True) return false;
        }
    }
    return true;
}

namespace {

RewardPrior draw_arm(const FamilyTemplate& tmpl, Rng& rng) {
    if (const auto* g = std::get_if<GaussianTemplate>(&tmpl)) {
        const double mu = g->mean_lo + (g->mean_hi - g->mean_lo) * rng.uniform01();
        return RewardPrior::gaussian(mu, g->sigma);
    }
    if (const auto* tp = std::get_if<TwoPointTemplate>(&tmpl)) {
        const double p = 0.02 + 0.96 * rng.uniform01();
        return RewardPrior::two_point(tp->lo, tp->hi, p);
    }
    const auto& dm = std::get<DiscreteMixtureTemplate>(tmpl);
    const double lambda = rng.uniform01();
    std::vector<double> probs(dm.support.size());
    for (std::size_t k = 0; k < probs.size(); ++k)
        probs[k] = lambda * dm.p_low[k] + (1.0 - lambda) * dm.p_high[k];
    return RewardPrior::finite_discrete(dm.support, probs);
}

}  // namespace

Instance generate_instance(int num_arms, const FamilyTemplate& tmpl, Rng& rng) {
    if (num_arms < 1) throw std::invalid_argument("generate_instance requires K >= 1");
    constexpr int kMaxRetries = 1000;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        std::vector<RewardPrior> arms;
        arms.reserve(static_cast<std::size_t>(num_arms));
        bool ok = true;
        bool has_above = false;
        for (int i = 0; i < num_arms && ok; ++i) {
            RewardPrior arm = draw_arm(tmpl, rng);
            if (std::abs(arm.mean()) < 1e-6) {
                ok = false;
                break;
            }
            has_above = has_above || arm.mean() > 0.0;
            arms.push_back(std::move(arm));
        }
        if (!ok) continue;
        if (num_arms >= 2 && !has_above) continue;
        Instance instance(std::move(arms), RewardPrior::point_mass(0.0), "generated");
        if (!instance.neg_arms_stochastically_ordered()) continue;
        return instance;
    }
    throw std::runtime_error("generate_instance: template failed to yield a valid instance");
}

FamilyTemplate family_template_by_name(const std::string& name) {
    if (name == "gaussian") return GaussianTemplate{};
    if (name == "two_point") return TwoPointTemplate{};
    if (name == "discrete") return DiscreteMixtureTemplate{};
    throw std::invalid_argument("unknown family template: " + name);
}

}  // namespace mirplan
