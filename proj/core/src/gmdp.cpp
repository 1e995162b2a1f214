#include "mirplan/gmdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mirplan {

namespace {
constexpr double kMirTol = 1e-12;

std::string state_str(StateSet s) {
    std::ostringstream os;
    os << "0x" << std::hex << s.bits();
    return os.str();
}
}  // namespace

PolicyTable::PolicyTable(int num_arms) : num_arms_(num_arms) {
    if (num_arms < 0 || num_arms > 20)
        throw std::invalid_argument("PolicyTable materialization is capped at K <= 20");
    actions_.assign(std::size_t{1} << num_arms, PolicyAction{});
}

PolicyAction PolicyTable::at(StateSet s) const {
    if (s.bits() >= actions_.size())
        throw std::out_of_range("PolicyTable: state outside table");
    return actions_[s.bits()];
}

PolicyFn PolicyTable::as_fn() const {
    return [this](StateSet s) { return at(s); };
}

std::string PolicyTable::serialize() const {
    std::ostringstream os;
    os << "policy-table k=" << num_arms_ << "\n";
    for (std::uint64_t mask = 0; mask < actions_.size(); ++mask) {
        const PolicyAction a = actions_[mask];
        os << mask << " " << a.i << " " << a.j << "\n";
    }
    return os.str();
}

PolicyTable PolicyTable::deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string tag, kfield;
    is >> tag >> kfield;
    if (tag != "policy-table" || kfield.rfind("k=", 0) != 0)
        throw std::invalid_argument("policy table: bad header");
    PolicyTable table(std::stoi(kfield.substr(2)));
    std::uint64_t mask;
    int i, j;
    while (is >> mask >> i >> j) table.actions_[mask] = PolicyAction{i, j};
    return table;
}

Portfolio mix_portfolio(const Instance& instance, int i, int j) {
    if (i < 0 || i >= instance.num_arms() || j < 0 || j >= instance.num_arms())
        throw std::invalid_argument("mix_portfolio: arm index out of range");
    if (!instance.is_above(i))
        throw std::invalid_argument("invalid mix: arm i must be above the threshold");
    if (i == j) return Portfolio::singleton(i);
    if (instance.is_above(j))
        throw std::invalid_argument("invalid mix: arm j must be below the threshold");
    const double mu_i = instance.offset_mean(i);
    const double mu_j = instance.offset_mean(j);
    const double denom = mu_i - mu_j;
    return Portfolio::pair(i, -mu_j / denom, j, mu_i / denom);
}

bool is_terminal(const Instance& instance, StateSet s) {
    for (int i : instance.above())
        if (s.contains(i)) return false;
    return true;
}

bool is_mir_prior(const Instance& instance, StateSet s, const Portfolio& p) {
    double value = 0.0;
    for (const auto& [arm, w] : p.entries()) {
        if (arm == kDefaultArm) {
            value += w * instance.threshold();
            continue;
        }
        if (arm < 0 || arm >= instance.num_arms() || !s.contains(arm))
            throw std::invalid_argument("invalid support: portfolio arm " + std::to_string(arm) +
                                        " outside state " + state_str(s));
        value += w * instance.arm_mean(arm);
    }
    return value >= instance.threshold() - kMirTol;
}

bool is_pvalid(const Instance& instance, StateSet s, const Portfolio& p) {
    if (!is_mir_prior(instance, s, p)) return false;
    bool neg_nonempty = false;
    for (int j : instance.neg())
        if (s.contains(j)) {
            neg_nonempty = true;
            break;
        }
    if (p.support_size() == 1) {
        const int a = p.entries().front().first;
        if (a == kDefaultArm) return false;
        if (neg_nonempty) return false;  // P' only allowed once neg(s) is exhausted
        return instance.is_above(a);
    }
    if (p.support_size() != 2 || !neg_nonempty) return false;
    const int a = p.entries()[0].first, b = p.entries()[1].first;
    if (a == kDefaultArm || b == kDefaultArm) return false;
    const int i = instance.is_above(a) ? a : b;
    const int jj = instance.is_above(a) ? b : a;
    if (!instance.is_above(i) || instance.is_above(jj)) return false;
    const Portfolio expected = mix_portfolio(instance, i, jj);
    return std::abs(p.weight(i) - expected.weight(i)) <= 1e-12 &&
           std::abs(p.weight(jj) - expected.weight(jj)) <= 1e-12;
}

bool is_pvalid_action(const Instance& instance, StateSet s, PolicyAction a) {
    if (a.is_terminal()) return is_terminal(instance, s);
    if (!a.is_set()) return false;
    if (is_terminal(instance, s)) return false;
    if (!s.contains(a.i) || !s.contains(a.j)) return false;
    bool neg_nonempty = false;
    for (int j : instance.neg())
        if (s.contains(j)) {
            neg_nonempty = true;
            break;
        }
    if (a.i == a.j) return instance.is_above(a.i) && !neg_nonempty;
    return neg_nonempty && instance.is_above(a.i) && !instance.is_above(a.j);
}

std::pair<int, StateSet> transition(StateSet s, const Portfolio& p, Rng& rng) {
    const int arm = p.sample(rng);
    if (arm == kDefaultArm) return {arm, s};
    return {arm, s.without(arm)};
}

namespace {

// Exact expectation of (max(M_e, M_u) - thr)^+ restricted to {M_e > thr} for
// independent discrete arms, by scanning the merged support.
double exact_terminal_reward(const Instance& instance, StateSet s) {
    const double thr = instance.threshold();
    const int k = instance.num_arms();
    std::vector<double> grid;
    for (int i = 0; i < k; ++i)
        for (const auto& [v, p] : instance.arm(i).atoms())
            if (v > thr) grid.push_back(v);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto joint_cdf = [&](double x, bool explored_only) {
        double f = 1.0;
        for (int i = 0; i < k; ++i) {
            const bool explored = !s.contains(i);
            if (explored_only && !explored) continue;
            f *= instance.arm(i).cdf(x);
        }
        return f;
    };

    // G(z) = Pr(max over all arms <= z and explored max > thr), z >= thr.
    const double fe_thr = joint_cdf(thr, /*explored_only=*/true);
    double expectation = 0.0;
    double prev_g = 0.0;
    for (double z : grid) {
        double fe_z = 1.0, fu_z = 1.0;
        for (int i = 0; i < k; ++i) {
            const double c = instance.arm(i).cdf(z);
            if (s.contains(i)) fu_z *= c;
            else fe_z *= c;
        }
        const double g = std::max(0.0, fe_z - fe_thr) * fu_z;
        expectation += (z - thr) * (g - prev_g);
        prev_g = g;
    }
    return thr + expectation;
}

double monte_carlo_terminal_reward(const Instance& instance, StateSet s,
                                   const TerminalRewardMode& mode, double* std_error) {
    const double thr = instance.threshold();
    Rng rng = Rng::derive(mode.seed, s.bits());
    double sum = 0.0, sum_sq = 0.0;
    const int n = std::max(2, mode.samples);
    for (int it = 0; it < n; ++it) {
        double max_all = -std::numeric_limits<double>::infinity();
        double max_explored = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < instance.num_arms(); ++i) {
            const double x = instance.arm(i).sample(rng);
            max_all = std::max(max_all, x);
            if (!s.contains(i)) max_explored = std::max(max_explored, x);
        }
        const double r = max_explored > thr ? std::max(max_all, thr) : thr;
        sum += r;
        sum_sq += r * r;
    }
    const double mean = sum / n;
    if (std_error) {
        const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
        *std_error = std::sqrt(var / n);
    }
    return mean;
}

}  // namespace

double terminal_reward(const Instance& instance, StateSet s, const TerminalRewardMode& mode,
                       double* std_error) {
    if (!is_terminal(instance, s))
        throw std::invalid_argument("terminal_reward: state is not terminal");
    if (mode.kind == TerminalRewardMode::Kind::ExactDiscrete) {
        if (!instance.all_discrete())
            throw std::invalid_argument(
                "unsupported exact: instance has an unbounded family; use Monte Carlo mode");
        if (std_error) *std_error = 0.0;
        return exact_terminal_reward(instance, s);
    }
    return monte_carlo_terminal_reward(instance, s, mode, std_error);
}

namespace {

PolicyAction checked_action(const PolicyFn& policy, StateSet s) {
    const PolicyAction a = policy(s);
    if (!a.is_set())
        throw std::invalid_argument("incomplete policy: no action for state " + state_str(s));
    if (!a.is_terminal() && (!s.contains(a.i) || !s.contains(a.j)))
        throw std::invalid_argument("incomplete policy: action outside state " + state_str(s));
    return a;
}

double q_value_rec(const Instance& instance, const PolicyFn& policy, StateSet s,
                   std::unordered_map<std::uint64_t, double>& memo) {
    if (s.empty()) return 1.0;
    if (const auto it = memo.find(s.bits()); it != memo.end()) return it->second;
    double value = 0.0;
    const PolicyAction a = checked_action(policy, s);
    if (!a.is_terminal()) {
        const Portfolio p = mix_portfolio(instance, a.i, a.j);
        if (a.i == a.j) {
            value = q_value_rec(instance, policy, s.without(a.i), memo);
        } else {
            value = p.weight(a.i) * q_value_rec(instance, policy, s.without(a.i), memo) +
                    p.weight(a.j) * q_value_rec(instance, policy, s.without(a.j), memo);
        }
    }
    memo.emplace(s.bits(), value);
    return value;
}

}  // namespace

double q_value(const Instance& instance, const PolicyFn& policy, StateSet s) {
    std::unordered_map<std::uint64_t, double> memo;
    return q_value_rec(instance, policy, s, memo);
}

std::vector<double> q_table(const Instance& instance, const PolicyFn& policy) {
    const int k = instance.num_arms();
    if (k > 20) throw std::invalid_argument("q_table: K exceeds the lattice cap of 20");
    std::vector<double> table(std::size_t{1} << k, 0.0);
    table[0] = 1.0;
    for (std::uint64_t mask = 1; mask < table.size(); ++mask) {
        const StateSet s(mask);
        const PolicyAction a = checked_action(policy, s);
        if (a.is_terminal()) continue;
        if (a.i == a.j) {
            table[mask] = table[s.without(a.i).bits()];
        } else {
            const Portfolio p = mix_portfolio(instance, a.i, a.j);
            table[mask] = p.weight(a.i) * table[s.without(a.i).bits()] +
                          p.weight(a.j) * table[s.without(a.j).bits()];
        }
    }
    return table;
}

std::vector<std::pair<StateSet, double>> reach_probabilities(const Instance& instance,
                                                             const PolicyFn& policy, StateSet s) {
    // Mass flows down the lattice one cardinality level at a time.
    std::map<std::uint64_t, double, std::greater<>> level;
    std::map<std::uint64_t, double> terminal_mass;
    level[s.bits()] = 1.0;
    std::vector<std::pair<std::uint64_t, double>> current;
    while (!level.empty()) {
        current.assign(level.begin(), level.end());
        level.clear();
        for (const auto& [bits, mass] : current) {
            const StateSet state(bits);
            const PolicyAction a = checked_action(policy, state);
            if (a.is_terminal()) {
                terminal_mass[bits] += mass;
                continue;
            }
            const Portfolio p = mix_portfolio(instance, a.i, a.j);
            for (const auto& [arm, w] : p.entries())
                level[state.without(arm).bits()] += mass * w;
        }
    }
    std::vector<std::pair<StateSet, double>> result;
    result.reserve(terminal_mass.size());
    for (const auto& [bits, mass] : terminal_mass) result.emplace_back(StateSet(bits), mass);
    return result;
}

double w_value(const Instance& instance, const PolicyFn& policy, StateSet s,
               const TerminalRewardMode& mode) {
    double value = 0.0;
    for (const auto& [terminal, mass] : reach_probabilities(instance, policy, s))
        value += mass * terminal_reward(instance, terminal, mode);
    return value;
}

namespace {

double w_backward_rec(const Instance& instance, const PolicyFn& policy, StateSet s,
                      const TerminalRewardMode& mode,
                      std::unordered_map<std::uint64_t, double>& memo) {
    if (const auto it = memo.find(s.bits()); it != memo.end()) return it->second;
    double value;
    const PolicyAction a = checked_action(policy, s);
    if (a.is_terminal()) {
        value = terminal_reward(instance, s, mode);
    } else {
        const Portfolio p = mix_portfolio(instance, a.i, a.j);
        value = 0.0;
        for (const auto& [arm, w] : p.entries())
            value += w * w_backward_rec(instance, policy, s.without(arm), mode, memo);
    }
    memo.emplace(s.bits(), value);
    return value;
}

}  // namespace

double w_value_backward(const Instance& instance, const PolicyFn& policy, StateSet s,
                        const TerminalRewardMode& mode) {
    std::unordered_map<std::uint64_t, double> memo;
    return w_backward_rec(instance, policy, s, mode, memo);
}

}  // namespace mirplan
