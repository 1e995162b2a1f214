#include "mirplan/bic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mirplan {

namespace {
constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

double min_arm_mean(const Instance& instance) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < instance.num_arms(); ++i) m = std::min(m, instance.arm_mean(i));
    return m;
}
}  // namespace

std::string check_assumption_dominance(const Instance& instance) {
    if (instance.arms_totally_ordered()) return {};
    return "Assumption 1 (stochastic order): arms are not pairwise dominance-comparable";
}

std::string check_assumption_support(const Instance& instance) {
    const int k = instance.num_arms();
    const auto prior = [&](int i) -> const RewardPrior& {
        return i < 0 ? instance.default_arm() : instance.arm(i);
    };
    const auto mean_of = [&](int i) { return i < 0 ? instance.threshold() : instance.arm_mean(i); };
    for (int i = -1; i < k; ++i) {
        for (int j = -1; j < k; ++j) {
            if (i == j) continue;
            if (!(prior(i).cdf_strict(mean_of(j)) > 0.0)) {
                std::ostringstream os;
                os << "Assumption 2 (support): Pr(X_" << (i < 0 ? std::string("default") : std::to_string(i))
                   << " < mu_" << (j < 0 ? std::string("default") : std::to_string(j)) << ") = 0";
                return os.str();
            }
        }
    }
    return {};
}

std::string check_assumption_default_superior(const Instance& instance) {
    for (int i = 0; i < instance.num_arms(); ++i)
        if (!(instance.threshold() > instance.arm_mean(i)))
            return "Assumption 3 (a priori superior default): arm " + std::to_string(i) +
                   " has mean >= the default mean";
    return {};
}

int greedy_recommendation(const Instance& instance, const InformationSet& info) {
    int best = kDefaultArm;
    double best_value = info.conditional_mean(kDefaultArm);
    for (int i = 0; i < instance.num_arms(); ++i) {
        const double v = info.conditional_mean(i);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    return best;
}

BicConfig compute_xi_gamma(const Instance& instance) {
    if (auto err = check_assumption_support(instance); !err.empty())
        throw std::invalid_argument(err);
    const auto bound = instance.support_bound();
    if (!bound) throw std::invalid_argument("compute_xi_gamma requires bounded priors");
    const double h = *bound;

    const int k = instance.num_arms();
    const auto prior = [&](int i) -> const RewardPrior& {
        return i < 0 ? instance.default_arm() : instance.arm(i);
    };
    const auto mean_of = [&](int i) { return i < 0 ? instance.threshold() : instance.arm_mean(i); };
    const auto gamma_of = [&](double xi) {
        double g = 1.0;
        for (int i = -1; i < k; ++i) {
            double prod = 1.0;
            for (int other = -1; other < k; ++other) {
                if (other == i) continue;
                prod *= prior(other).cdf_strict(mean_of(i) - xi);
            }
            g = std::min(g, prod);
        }
        return g;
    };

    constexpr int kGridSize = 512;
    constexpr double kGammaFloor = 1e-9;
    double best_xi = 0.0, best_gamma = 0.0, best_product = -1.0;
    for (int step = 0; step < kGridSize; ++step) {
        // Log spacing from h * 1e-6 up to h.
        const double xi = h * std::exp(std::log(1e-6) * (1.0 - static_cast<double>(step) /
                                                                   (kGridSize - 1)));
        const double gamma = gamma_of(xi);
        if (gamma <= kGammaFloor) continue;
        if (xi * gamma > best_product) {
            best_product = xi * gamma;
            best_xi = xi;
            best_gamma = gamma;
        }
    }
    if (best_product <= 0.0)
        throw std::invalid_argument(
            "compute_xi_gamma: no (xi, gamma) candidate with gamma above the floor");
    BicConfig config;
    config.xi = best_xi;
    // Returned gamma sits strictly below the minimum product so the defining
    // inequality is strict.
    config.gamma = best_gamma * (1.0 - 1e-9);
    config.support_bound = h;
    config.phase_length = static_cast<int>(std::ceil(h / (config.xi * config.gamma))) + 1;
    return config;
}

namespace {

struct BicRunner {
    const Instance& instance;
    const BicConfig& config;
    int horizon;
    Rng& rng;
    // Exploitation is absorbing; welfare-only runs may account for the
    // constant tail in closed form instead of playing it out.
    bool analytic_exploit_tail = false;

    // Presampled static rewards.
    std::vector<double> arm_values;
    double default_value = 0.0;

    InformationSet info;
    IregbEngine* engine = nullptr;
    double best_revealed = -std::numeric_limits<double>::infinity();

    BicRunner(const Instance& instance, const BicConfig& config, int horizon, Rng& rng)
        : instance(instance), config(config), horizon(horizon), rng(rng), info(instance) {
        default_value = instance.default_arm().sample(rng);
        arm_values.reserve(static_cast<std::size_t>(instance.num_arms()));
        for (int i = 0; i < instance.num_arms(); ++i)
            arm_values.push_back(instance.arm(i).sample(rng));
    }

    double value(int arm) const {
        return arm == kDefaultArm ? default_value : arm_values[static_cast<std::size_t>(arm)];
    }

    void reveal(int arm) {
        if (arm == kDefaultArm) {
            info.reveal(kDefaultArm, default_value);
            return;
        }
        if (!info.known(arm)) {
            info.reveal(arm, value(arm));
            best_revealed = std::max(best_revealed, value(arm));
        }
        engine->reveal(arm, value(arm));
    }

    double certificate(const Portfolio& p) const {
        double v = 0.0;
        for (const auto& [arm, w] : p.entries()) v += w * info.conditional_mean(arm);
        return v - info.conditional_mean(kDefaultArm);
    }

    // Runs the mechanism, invoking sink(round) per round. Returns total reward.
    template <typename Sink>
    double run(Sink&& sink) {
        double total = 0.0;
        int t = 1;
        const auto play_fixed = [&](int rec, int phase_index, Phase engine_phase) {
            BicRound round;
            round.t = t;
            round.portfolio = Portfolio::singleton(rec);
            round.recommendation = rec;
            round.action = rec;
            round.reward = value(rec);
            round.certificate = certificate(round.portfolio);
            round.phase_index = phase_index;
            round.engine_phase = engine_phase;
            total += round.reward;
            sink(round);
            reveal(rec);
            info.advance_round();
            ++t;
        };

        // Round 1: the default arm, realizing the MIR threshold.
        play_fixed(kDefaultArm, 0, Phase::OgpExploration);

        // The embedded mechanism anchors on the realized default value.
        IregbEngine embedded(instance, default_value, IregbEngine::Variant::Standard);
        engine = &embedded;

        // Rounds 2..K+1: greedy burst when the default realized below every
        // prior mean, otherwise the default again.
        const bool greedy_burst = default_value < min_arm_mean(instance);
        for (int slot = 0; slot < instance.num_arms() && t <= horizon; ++slot) {
            const int rec = greedy_burst ? greedy_recommendation(instance, info) : kDefaultArm;
            play_fixed(rec, 0, Phase::OgpExploration);
        }

        // Phases of B rounds, one hidden exploration slot each.
        int phase_index = 0;
        while (t <= horizon) {
            ++phase_index;
            const int b = config.phase_length;
            if (engine->exploiting()) {
                // Exploitation is absorbing: follow the embedded mechanism.
                const int rec = engine->exploit_arm();
                if (analytic_exploit_tail) {
                    total += value(rec) * (horizon - t + 1);
                    t = horizon + 1;
                    break;
                }
                for (int slot = 0; slot < b && t <= horizon; ++slot)
                    play_fixed(rec, phase_index, rec == kDefaultArm ? Phase::ExploitDefault
                                                                    : Phase::ExploitBest);
                continue;
            }
            const int explorer_slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(b)));
            for (int slot = 0; slot < b && t <= horizon; ++slot) {
                if (slot == explorer_slot) {
                    const auto step = engine->next();
                    BicRound round;
                    round.t = t;
                    round.portfolio = step.portfolio;
                    const int arm = step.portfolio.sample(rng);
                    round.recommendation = arm;
                    round.action = arm;
                    round.reward = value(arm);
                    round.certificate = certificate(step.portfolio);
                    round.phase_index = phase_index;
                    round.explorer = true;
                    round.engine_phase = step.phase;
                    total += round.reward;
                    sink(round);
                    reveal(arm);
                    info.advance_round();
                    ++t;
                } else {
                    const bool improved = best_revealed > default_value;
                    const int rec =
                        improved ? greedy_recommendation(instance, info) : kDefaultArm;
                    play_fixed(rec, phase_index,
                               improved ? Phase::ExploitBest : Phase::ExploitDefault);
                }
            }
        }
        return total;
    }
};

void validate_bic_assumptions(const Instance& instance) {
    for (const auto& check : {check_assumption_dominance(instance),
                              check_assumption_default_superior(instance),
                              check_assumption_support(instance)})
        if (!check.empty()) throw std::invalid_argument(check);
    if (!instance.support_bound())
        throw std::invalid_argument("bic mechanism requires bounded priors");
}

}  // namespace

BicTrace run_bic_iregb(const Instance& instance, const BicConfig& config, int horizon, Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    validate_bic_assumptions(instance);
    BicTrace trace;
    trace.horizon = horizon;
    trace.config = config;
    BicRunner runner(instance, config, horizon, rng);
    trace.total_reward = runner.run([&](const BicRound& r) { trace.rounds.push_back(r); });
    trace.default_value = runner.default_value;
    return trace;
}

BicTrace run_bic_iregb(const Instance& instance, int horizon, Rng& rng) {
    return run_bic_iregb(instance, compute_xi_gamma(instance), horizon, rng);
}

double run_bic_welfare(const Instance& instance, const BicConfig& config, int horizon, Rng& rng) {
    BicRunner runner(instance, config, horizon, rng);
    runner.analytic_exploit_tail = true;
    return runner.run([](const BicRound&) {}) / horizon;
}

double run_bic_welfare(const Instance& instance, int horizon, Rng& rng) {
    return run_bic_welfare(instance, compute_xi_gamma(instance), horizon, rng);
}

namespace {

struct AuditAccumulator {
    // Flat (t, recommended, alternative) cells; slot 0 is the default arm.
    int horizon = 0;
    int arms = 0;
    std::vector<double> n, sum, sum_sq;

    AuditAccumulator(int horizon, int arms) : horizon(horizon), arms(arms) {
        const std::size_t cells = static_cast<std::size_t>(horizon) * (arms + 1) * (arms + 1);
        n.assign(cells, 0.0);
        sum.assign(cells, 0.0);
        sum_sq.assign(cells, 0.0);
    }

    std::size_t index(int t, int rec, int alt) const {
        return (static_cast<std::size_t>(t) * (arms + 1) + static_cast<std::size_t>(rec + 1)) *
                   (arms + 1) +
               static_cast<std::size_t>(alt + 1);
    }

    void record(int t, int rec, const std::vector<double>& values, double default_value) {
        const double x_rec = rec == kDefaultArm ? default_value
                                                : values[static_cast<std::size_t>(rec)];
        for (int alt = -1; alt < arms; ++alt) {
            if (alt == rec) continue;
            const double x_alt = alt == kDefaultArm ? default_value
                                                    : values[static_cast<std::size_t>(alt)];
            const double d = x_rec - x_alt;
            const std::size_t idx = index(t, rec, alt);
            n[idx] += 1.0;
            sum[idx] += d;
            sum_sq[idx] += d * d;
        }
    }

    void merge(const AuditAccumulator& other) {
        for (std::size_t i = 0; i < n.size(); ++i) {
            n[i] += other.n[i];
            sum[i] += other.sum[i];
            sum_sq[i] += other.sum_sq[i];
        }
    }
};

}  // namespace

BicAuditReport audit_bic(const Instance& instance, Mechanism mech, int horizon,
                         long long replications, std::uint64_t seed, BeliefMode mode,
                         int threads) {
    const int arms = instance.num_arms();
    const int t_slots = mode == BeliefMode::UniformBelief ? 1 : horizon;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::max<long long>(1, std::min<long long>(threads, replications)));

    BicConfig config;
    if (mech == Mechanism::BicIregb) config = compute_xi_gamma(instance);

    std::vector<AuditAccumulator> partial(static_cast<std::size_t>(threads),
                                          AuditAccumulator(t_slots, arms));
    const auto worker = [&](int tid) {
        AuditAccumulator& acc = partial[static_cast<std::size_t>(tid)];
        for (long long rep = tid; rep < replications; rep += threads) {
            Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(rep));
            if (mech == Mechanism::BicIregb) {
                BicRunner runner(instance, config, horizon, rng);
                runner.run([&](const BicRound& r) {
                    const int t = mode == BeliefMode::UniformBelief ? 0 : r.t - 1;
                    acc.record(t, r.recommendation, runner.arm_values, runner.default_value);
                });
            } else {
                // Obedient run of the plain mechanism, audited round by round.
                std::vector<double> values;
                values.reserve(static_cast<std::size_t>(arms));
                double default_value = instance.default_arm().sample(rng);
                for (int i = 0; i < arms; ++i) values.push_back(instance.arm(i).sample(rng));
                IregbEngine engine(instance, instance.threshold(),
                                   mech == Mechanism::IregbPrime
                                       ? IregbEngine::Variant::TwoSupported
                                       : IregbEngine::Variant::Standard);
                for (int t = 1; t <= horizon; ++t) {
                    const auto step = engine.next();
                    const int arm = step.portfolio.sample(rng);
                    const int slot = mode == BeliefMode::UniformBelief ? 0 : t - 1;
                    acc.record(slot, arm, values, default_value);
                    engine.reveal(arm, arm == kDefaultArm ? default_value
                                                          : values[static_cast<std::size_t>(arm)]);
                }
            }
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
        for (auto& th : pool) th.join();
    }
    AuditAccumulator total = std::move(partial.front());
    for (std::size_t i = 1; i < partial.size(); ++i) total.merge(partial[i]);

    BicAuditReport report;
    for (int t = 0; t < t_slots; ++t) {
        for (int rec = -1; rec < arms; ++rec) {
            for (int alt = -1; alt < arms; ++alt) {
                if (alt == rec) continue;
                const std::size_t idx = total.index(t, rec, alt);
                const double count = total.n[idx];
                if (count == 0.0) continue;
                BicAuditCell cell;
                cell.t = t + 1;
                cell.recommended = rec;
                cell.alternative = alt;
                cell.n = static_cast<long long>(count);
                cell.estimate = total.sum[idx] / count;
                if (count > 1.5) {
                    const double var = std::max(
                        0.0, (total.sum_sq[idx] - count * cell.estimate * cell.estimate) /
                                 (count - 1.0));
                    const double se = std::sqrt(var / count);
                    cell.ci_low = cell.estimate - kZ99 * se;
                    cell.ci_high = cell.estimate + kZ99 * se;
                } else {
                    cell.ci_low = -std::numeric_limits<double>::infinity();
                    cell.ci_high = std::numeric_limits<double>::infinity();
                }
                cell.sparse = count < 30.0;
                cell.flagged = !cell.sparse && cell.ci_high < 0.0;
                report.flagged_count += cell.flagged ? 1 : 0;
                report.sparse_count += cell.sparse ? 1 : 0;
                report.cells.push_back(cell);
            }
        }
    }
    return report;
}

namespace {

// An arm recommendation is harmful when, on the mechanism's information, the
// arm has no chance of beating the default's conditional value. With a
// point-mass-zero default this is exactly "known non-positive value".
bool harmless_step(const Instance& instance, const InformationSet& info, int arm) {
    if (arm == kDefaultArm) return true;  // the agents' own fallback
    const double anchor = info.conditional_mean(kDefaultArm);
    if (info.known(arm)) return info.value(arm) > anchor;
    return instance.arm(arm).prob_above(anchor) > 0.0;
}

}  // namespace

bool audit_harmless(const SimTrace& trace, const Instance& instance) {
    InformationSet info(instance);
    for (const auto& round : trace.rounds) {
        if (!harmless_step(instance, info, round.arm)) return false;
        info.reveal(round.arm, round.reward);
    }
    return true;
}

bool audit_harmless(const BicTrace& trace, const Instance& instance) {
    InformationSet info(instance);
    for (const auto& round : trace.rounds) {
        if (!harmless_step(instance, info, round.recommendation)) return false;
        info.reveal(round.recommendation, round.reward);
    }
    return true;
}

}  // namespace mirplan
