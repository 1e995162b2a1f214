#include "mirplan/dp_oracle.hpp"

#include <cinttypes>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mirplan {

PolicyFn DpSolution::policy() const {
    return [this](StateSet s) { return best_action[s.bits()]; };
}

std::string DpSolution::serialize() const {
    std::ostringstream os;
    os << "dp-solution k=" << num_arms << "\n";
    char buf[64];
    for (std::size_t mask = 0; mask < w_star.size(); ++mask) {
        std::snprintf(buf, sizeof(buf), "%.17g", w_star[mask]);
        os << mask << " " << buf << " " << best_action[mask].i << " " << best_action[mask].j
           << "\n";
    }
    return os.str();
}

DpSolution DpSolution::deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string tag, kfield;
    is >> tag >> kfield;
    if (tag != "dp-solution" || kfield.rfind("k=", 0) != 0)
        throw std::invalid_argument("dp solution: bad header");
    DpSolution sol;
    sol.num_arms = std::stoi(kfield.substr(2));
    const std::size_t n = std::size_t{1} << sol.num_arms;
    sol.w_star.assign(n, 0.0);
    sol.best_action.assign(n, PolicyAction{});
    std::uint64_t mask;
    double w;
    int i, j;
    while (is >> mask >> w >> i >> j) {
        sol.w_star[mask] = w;
        sol.best_action[mask] = PolicyAction{i, j};
    }
    return sol;
}

DpSolution DpOracle::solve(const Instance& instance, const TerminalRewardMode& mode) {
    const int k = instance.num_arms();
    if (k > kMaxArms)
        throw std::invalid_argument("dp oracle: K exceeds the 2^K lattice cap of 20");
    if (mode.kind == TerminalRewardMode::Kind::ExactDiscrete && !instance.all_discrete())
        throw std::invalid_argument("dp oracle: exact mode requires discrete priors");

    DpSolution sol;
    sol.num_arms = k;
    sol.mode = mode;
    const std::size_t n = std::size_t{1} << k;
    sol.w_star.assign(n, 0.0);
    sol.best_action.assign(n, PolicyAction{});

    // Population-count strata ascending: every successor s \ {a} is final
    // before s is processed.
    for (int pop = 0; pop <= k; ++pop) {
        std::uint64_t mask = (pop == 0) ? 0 : ((std::uint64_t{1} << pop) - 1);
        const std::uint64_t limit = std::uint64_t{1} << k;
        while (true) {
            const StateSet s(mask);
            if (is_terminal(instance, s)) {
                sol.w_star[mask] = terminal_reward(instance, s, mode);
                sol.best_action[mask] = PolicyAction::terminal();
            } else {
                double best = -std::numeric_limits<double>::infinity();
                PolicyAction best_action{};
                bool has_neg = false;
                for (int j : instance.neg())
                    if (s.contains(j)) {
                        has_neg = true;
                        break;
                    }
                if (!has_neg) {
                    for (int i : instance.above()) {
                        if (!s.contains(i)) continue;
                        const double v = sol.w_star[s.without(i).bits()];
                        if (v > best) {
                            best = v;
                            best_action = PolicyAction::mix(i, i);
                        }
                    }
                } else {
                    for (int i : instance.above()) {
                        if (!s.contains(i)) continue;
                        for (int j : instance.neg()) {
                            if (!s.contains(j)) continue;
                            const Portfolio p = mix_portfolio(instance, i, j);
                            const double v = p.weight(i) * sol.w_star[s.without(i).bits()] +
                                             p.weight(j) * sol.w_star[s.without(j).bits()];
                            if (v > best) {
                                best = v;
                                best_action = PolicyAction::mix(i, j);
                            }
                        }
                    }
                }
                sol.w_star[mask] = best;
                sol.best_action[mask] = best_action;
            }
            if (pop == 0) break;
            // Gosper's hack: next subset of the same cardinality.
            const std::uint64_t c = mask & (~mask + 1);
            const std::uint64_t r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
            if (mask >= limit) break;
        }
    }
    return sol;
}

double DpOracle::w_star(const Instance& instance, const TerminalRewardMode& mode) {
    return solve(instance, mode).w_star_full();
}

}  // namespace mirplan
