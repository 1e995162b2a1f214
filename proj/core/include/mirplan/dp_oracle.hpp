#pragma once

#include <string>
#include <vector>

#include "mirplan/gmdp.hpp"

namespace mirplan {

// Exhaustive bottom-up dynamic program over the 2^K subset lattice with
// the admissible two-arm actions; the ground truth against which the index
// policy is validated.
struct DpSolution {
    int num_arms = 0;
    TerminalRewardMode mode;
    std::vector<double> w_star;             // indexed by state bitmask
    std::vector<PolicyAction> best_action;  // lexicographic (i, j) tie-break

    double value(StateSet s) const { return w_star[s.bits()]; }
    double w_star_full() const { return w_star[(std::size_t{1} << num_arms) - 1]; }
    PolicyAction action(StateSet s) const { return best_action[s.bits()]; }
    PolicyFn policy() const;

    std::string serialize() const;
    static DpSolution deserialize(const std::string& text);
};

class DpOracle {
public:
    static constexpr int kMaxArms = 20;

    // K <= 20; exact mode additionally requires all-discrete priors.
    static DpSolution solve(const Instance& instance,
                            const TerminalRewardMode& mode = TerminalRewardMode::exact());
    static double w_star(const Instance& instance,
                         const TerminalRewardMode& mode = TerminalRewardMode::exact());
};

}  // namespace mirplan
