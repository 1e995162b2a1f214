#include "mirplan/priors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mirplan {

namespace {

constexpr double kProbSumTol = 1e-12;

double normal_cdf(double x, double mean, double sigma) {
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

}  // namespace

RewardPrior RewardPrior::point_mass(double value) {
    return RewardPrior(PointMass{value}, value, std::abs(value), {{value, 1.0}});
}

RewardPrior RewardPrior::two_point(double lo, double hi, double p_hi) {
    if (!(lo < 0.0 && 0.0 < hi))
        throw std::invalid_argument("two_point requires lo < 0 < hi");
    if (!(p_hi >= 0.0 && p_hi <= 1.0))
        throw std::invalid_argument("two_point requires p_hi in [0,1]");
    const double mean = p_hi * hi + (1.0 - p_hi) * lo;
    return RewardPrior(TwoPoint{lo, hi, p_hi}, mean, std::max(-lo, hi),
                       {{lo, 1.0 - p_hi}, {hi, p_hi}});
}

RewardPrior RewardPrior::finite_discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
        throw std::invalid_argument("finite_discrete requires matching nonempty values/probs");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && !(values[i - 1] < values[i]))
            throw std::invalid_argument("finite_discrete values must be strictly increasing");
        if (!(probs[i] > 0.0))
            throw std::invalid_argument("finite_discrete probabilities must be positive");
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > kProbSumTol)
        throw std::invalid_argument("finite_discrete probabilities must sum to 1");
    double mean = 0.0, bound = 0.0;
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        mean += values[i] * probs[i];
        bound = std::max(bound, std::abs(values[i]));
        atoms.emplace_back(values[i], probs[i]);
    }
    return RewardPrior(FiniteDiscrete{std::move(values), std::move(probs)}, mean, bound,
                       std::move(atoms));
}

RewardPrior RewardPrior::gaussian(double mean, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian requires sigma > 0");
    return RewardPrior(GaussianCommonVar{mean, sigma}, mean, std::nullopt, {});
}

double RewardPrior::cdf(double x) const {
    if (const auto* g = std::get_if<GaussianCommonVar>(&family_))
        return normal_cdf(x, g->mean, g->sigma);
    double acc = 0.0;
    for (const auto& [v, p] : atoms_) {
        if (v <= x) acc += p;
        else break;
    }
    return acc;
}

double RewardPrior::cdf_strict(double x) const {
    if (const auto* g = std::get_if<GaussianCommonVar>(&family_))
        return normal_cdf(x, g->mean, g->sigma);
    double acc = 0.0;
    for (const auto& [v, p] : atoms_) {
        if (v < x) acc += p;
        else break;
    }
    return acc;
}

double RewardPrior::sample(Rng& rng) const {
    if (const auto* g = std::get_if<GaussianCommonVar>(&family_))
        return g->mean + g->sigma * rng.gaussian();
    if (atoms_.size() == 1) return atoms_.front().first;
    double u = rng.uniform01();
    for (const auto& [v, p] : atoms_) {
        if (u < p) return v;
        u -= p;
    }
    return atoms_.back().first;
}

const std::vector<std::pair<double, double>>& RewardPrior::atoms() const {
    if (!is_discrete())
        throw std::logic_error("atoms() is undefined for the Gaussian family");
    return atoms_;
}

std::string RewardPrior::describe() const {
    std::ostringstream os;
    if (const auto* pm = std::get_if<PointMass>(&family_)) {
        os << "point_mass(" << pm->value << ")";
    } else if (const auto* tp = std::get_if<TwoPoint>(&family_)) {
        os << "two_point(" << tp->lo << "," << tp->hi << ";p_hi=" << tp->p_hi << ")";
    } else if (const auto* fd = std::get_if<FiniteDiscrete>(&family_)) {
        os << "finite_discrete(";
        for (std::size_t i = 0; i < fd->values.size(); ++i) {
            if (i) os << ",";
            os << fd->values[i] << ":" << fd->probs[i];
        }
        os << ")";
    } else {
        const auto& g = std::get<GaussianCommonVar>(family_);
        os << "gaussian(" << g.mean << "," << g.sigma << ")";
    }
    return os.str();
}

Tristate dominates(const RewardPrior& p, const RewardPrior& q) {
    if (p.is_discrete() && q.is_discrete()) {
        // Merged-support CDF scan: p dominates q iff F_p <= F_q at every atom.
        std::vector<double> grid;
        for (const auto& [v, w] : p.atoms()) grid.push_back(v);
        for (const auto& [v, w] : q.atoms()) grid.push_back(v);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (double x : grid)
            if (p.cdf(x) > q.cdf(x) + 1e-15) return Tristate::False;
        return Tristate::True;
    }
    const auto* gp = std::get_if<GaussianCommonVar>(&p.family());
    const auto* gq = std::get_if<GaussianCommonVar>(&q.family());
    if (gp && gq) {
        // Equal variance: CDFs are translates, ordered by mean. Unequal
        // variance Gaussians cross, so neither dominates unless identical.
        if (std::abs(gp->sigma - gq->sigma) < 1e-15)
            return gp->mean >= gq->mean ? Tristate::True : Tristate::False;
        return Tristate::False;
    }
    return Tristate::Undecidable;
}

}  // namespace mirplan
