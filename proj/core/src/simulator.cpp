#include "mirplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "mirplan/bic.hpp"
#include "mirplan/dp_oracle.hpp"

namespace mirplan {

const char* phase_label(Phase phase) {
    switch (phase) {
        case Phase::OgpExploration: return "ogp-exploration";
        case Phase::BernoulliTrial: return "bernoulli-trial";
        case Phase::ExploitBest: return "exploit-best";
        case Phase::ExploitDefault: return "exploit-default";
    }
    return "?";
}

Mechanism mechanism_by_name(const std::string& name) {
    if (name == "iregb") return Mechanism::Iregb;
    if (name == "iregb_prime") return Mechanism::IregbPrime;
    if (name == "bic_iregb") return Mechanism::BicIregb;
    throw std::invalid_argument("unknown mechanism: " + name);
}

const char* mechanism_name(Mechanism mech) {
    switch (mech) {
        case Mechanism::Iregb: return "iregb";
        case Mechanism::IregbPrime: return "iregb_prime";
        case Mechanism::BicIregb: return "bic_iregb";
    }
    return "?";
}

Portfolio bernoulli_trial_portfolio(const Instance& instance, int best_arm, double x_best,
                                    int j) {
    const double thr = instance.threshold();
    if (!(x_best > thr))
        throw std::invalid_argument("bernoulli trial requires a realized value above the threshold");
    const double mu_j = instance.arm_mean(j) - thr;
    if (!(mu_j < 0.0))
        throw std::invalid_argument("bernoulli trial target must lie below the threshold");
    const double x = x_best - thr;
    return Portfolio::pair(best_arm, -mu_j / (x - mu_j), j, x / (x - mu_j));
}

namespace {

std::vector<double> offsets_for(const Instance& instance, double threshold) {
    std::vector<double> offsets(static_cast<std::size_t>(instance.num_arms()));
    for (int i = 0; i < instance.num_arms(); ++i)
        offsets[static_cast<std::size_t>(i)] = instance.arm_mean(i) - threshold;
    return offsets;
}

}  // namespace

IregbEngine::IregbEngine(const Instance& instance, double threshold, Variant variant)
    : instance_(&instance),
      threshold_(threshold),
      variant_(variant),
      playout_(offsets_for(instance, threshold),
               /*singleton_by_mean=*/variant == Variant::TwoSupported) {
    for (int j = 0; j < instance.num_arms(); ++j)
        if (!(instance.arm_mean(j) - threshold > 0.0)) trial_order_.push_back(j);
    std::sort(trial_order_.begin(), trial_order_.end(), [&](int a, int b) {
        if (instance.arm_mean(a) != instance.arm_mean(b))
            return instance.arm_mean(a) > instance.arm_mean(b);
        return a < b;
    });
}

IregbEngine::Step IregbEngine::next() {
    if (variant_ == Variant::TwoSupported && positive_found())
        return {Portfolio::singleton(best_arm_), Phase::ExploitBest};
    if (!playout_.terminal()) {
        const PolicyAction a = playout_.current_action();
        if (a.i == a.j) return {Portfolio::singleton(a.i), Phase::OgpExploration};
        double wi, wj;
        playout_.current_weights(&wi, &wj);
        return {Portfolio::pair(a.i, wi, a.j, wj), Phase::OgpExploration};
    }
    if (positive_found()) {
        if (variant_ == Variant::Standard && explored_count_ < instance_->num_arms()) {
            if (trial_anchor_ < 0) {
                // Best explored arm at the moment trials begin stays the
                // anchor for the whole trial phase.
                trial_anchor_ = best_arm_;
                trial_anchor_value_ = best_value_;
            }
            return {trial_portfolio(next_trial_target()), Phase::BernoulliTrial};
        }
        return {Portfolio::singleton(best_arm_), Phase::ExploitBest};
    }
    return {Portfolio::singleton(kDefaultArm), Phase::ExploitDefault};
}

int IregbEngine::next_trial_target() {
    while (trial_cursor_ < trial_order_.size() && playout_.explored(trial_order_[trial_cursor_]))
        ++trial_cursor_;
    if (trial_cursor_ >= trial_order_.size())
        throw std::logic_error("no unexplored trial target");
    return trial_order_[trial_cursor_];
}

Portfolio IregbEngine::trial_portfolio(int target) const {
    const double x = trial_anchor_value_ - threshold_;
    const double mu_j = instance_->arm_mean(target) - threshold_;
    return Portfolio::pair(trial_anchor_, -mu_j / (x - mu_j), target, x / (x - mu_j));
}

void IregbEngine::reveal(int arm, double value) {
    if (arm == kDefaultArm) return;
    if (playout_.explored(arm)) return;
    playout_.mark_explored(arm);
    ++explored_count_;
    if (best_arm_ < 0 || value > best_value_ || (value == best_value_ && arm < best_arm_)) {
        best_arm_ = arm;
        best_value_ = value;
    }
}

bool IregbEngine::exploiting() {
    if (!playout_.terminal()) return false;
    if (!positive_found()) return true;  // default forever
    if (variant_ == Variant::TwoSupported) return true;
    return explored_count_ >= instance_->num_arms();
}

int IregbEngine::exploit_arm() {
    if (positive_found()) return best_arm_;
    return kDefaultArm;
}

namespace {

struct RunState {
    std::vector<double> arm_values;
    double default_value = 0.0;

    static RunState presample(const Instance& instance, Rng& rng) {
        RunState st;
        st.default_value = instance.default_arm().sample(rng);
        st.arm_values.reserve(static_cast<std::size_t>(instance.num_arms()));
        for (int i = 0; i < instance.num_arms(); ++i)
            st.arm_values.push_back(instance.arm(i).sample(rng));
        return st;
    }
    double value(int arm) const {
        return arm == kDefaultArm ? default_value : arm_values[static_cast<std::size_t>(arm)];
    }
};

double portfolio_certificate(const Portfolio& p, const InformationSet& info) {
    double value = 0.0;
    for (const auto& [arm, w] : p.entries()) value += w * info.conditional_mean(arm);
    return value - info.conditional_mean(kDefaultArm);
}

SimTrace run_engine_trace(const Instance& instance, IregbEngine::Variant variant, int horizon,
                          Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const RunState st = RunState::presample(instance, rng);
    IregbEngine engine(instance, instance.threshold(), variant);
    InformationSet info(instance);
    SimTrace trace;
    trace.horizon = horizon;
    trace.rounds.reserve(static_cast<std::size_t>(std::min(horizon, 1 << 20)));
    for (int t = 1; t <= horizon; ++t) {
        const auto step = engine.next();
        const int arm = step.portfolio.sample(rng);
        const double reward = st.value(arm);
        Round round;
        round.t = t;
        round.portfolio = step.portfolio;
        round.arm = arm;
        round.reward = reward;
        round.phase = step.phase;
        round.certificate = portfolio_certificate(step.portfolio, info);
        trace.rounds.push_back(std::move(round));
        trace.total_reward += reward;
        info.reveal(arm, reward);
        engine.reveal(arm, reward);
        info.advance_round();
    }
    return trace;
}

}  // namespace

SimTrace run_iregb(const Instance& instance, int horizon, Rng& rng) {
    return run_engine_trace(instance, IregbEngine::Variant::Standard, horizon, rng);
}

SimTrace run_iregb_prime(const Instance& instance, int horizon, Rng& rng) {
    const TwoPoint* common = nullptr;
    for (int i = 0; i < instance.num_arms(); ++i) {
        const auto* tp = std::get_if<TwoPoint>(&instance.arm(i).family());
        if (!tp)
            throw std::invalid_argument("iregb_prime requires two-point arm priors");
        if (common && (common->lo != tp->lo || common->hi != tp->hi))
            throw std::invalid_argument("iregb_prime requires a common support pair");
        common = tp;
    }
    return run_engine_trace(instance, IregbEngine::Variant::TwoSupported, horizon, rng);
}

double run_welfare(const Instance& instance, Mechanism mech, int horizon, Rng& rng) {
    if (mech == Mechanism::BicIregb) return run_bic_welfare(instance, horizon, rng);
    const RunState st = RunState::presample(instance, rng);
    IregbEngine engine(instance, instance.threshold(),
                       mech == Mechanism::IregbPrime ? IregbEngine::Variant::TwoSupported
                                                     : IregbEngine::Variant::Standard);
    double total = 0.0;
    int t = 1;
    while (t <= horizon) {
        if (engine.exploiting()) {
            total += st.value(engine.exploit_arm()) * (horizon - t + 1);
            break;
        }
        const auto step = engine.next();
        const int arm = step.portfolio.sample(rng);
        const double reward = st.value(arm);
        total += reward;
        engine.reveal(arm, reward);
        ++t;
    }
    return total / horizon;
}

WelfareEstimate estimate_welfare(const Instance& instance, Mechanism mech, int horizon,
                                 long long replications, std::uint64_t seed, int threads) {
    if (replications < 2) throw std::invalid_argument("estimate_welfare requires >= 2 replications");
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::max<long long>(1, std::min<long long>(threads, replications)));

    // The hidden-exploration parameters depend only on the instance.
    BicConfig bic_config;
    if (mech == Mechanism::BicIregb) bic_config = compute_xi_gamma(instance);

    // Per-replication slots keep the final reduction order fixed, so the
    // estimate is bit-identical for any thread count.
    std::vector<double> welfare(static_cast<std::size_t>(replications), 0.0);
    const auto worker = [&](int tid) {
        for (long long rep = tid; rep < replications; rep += threads) {
            Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(rep));
            welfare[static_cast<std::size_t>(rep)] =
                mech == Mechanism::BicIregb
                    ? run_bic_welfare(instance, bic_config, horizon, rng)
                    : run_welfare(instance, mech, horizon, rng);
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
    double sum = 0.0;
    bool all_equal = true;
    for (double w : welfare) {
        sum += w;
        all_equal = all_equal && w == welfare.front();
    }
    WelfareEstimate est;
    est.replications = replications;
    est.mean = sum / static_cast<double>(replications);
    if (all_equal) {
        est.mean = welfare.front();
        est.std_error = 0.0;
        return est;
    }
    double sq = 0.0;
    for (double w : welfare) sq += (w - est.mean) * (w - est.mean);
    est.std_error = std::sqrt(sq / static_cast<double>(replications - 1) /
                              static_cast<double>(replications));
    return est;
}

double neg_mean_magnitude(const Instance& instance) {
    double eta = 0.0;
    for (int j : instance.neg()) eta = std::max(eta, -instance.offset_mean(j));
    return eta;
}

double expected_inverse_delta(const Instance& instance) {
    if (!instance.all_discrete())
        throw std::invalid_argument("expected_inverse_delta requires discrete priors");
    const double thr = instance.threshold();
    if (instance.above().empty()) return 0.0;
    // delta = max over above arms of the positive offsets; distribution of the
    // max from the product of CDFs over the merged positive support.
    std::vector<double> grid;
    for (int i : instance.above())
        for (const auto& [v, p] : instance.arm(i).atoms())
            if (v > thr) grid.push_back(v);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto joint_cdf = [&](double x) {
        double f = 1.0;
        for (int i : instance.above()) f *= instance.arm(i).cdf(x);
        return f;
    };
    const double p_none = joint_cdf(thr);
    if (p_none >= 1.0) return 0.0;
    double acc = 0.0, prev = p_none;
    for (double z : grid) {
        const double f = joint_cdf(z);
        acc += (f - prev) / (z - thr);
        prev = f;
    }
    return acc / (1.0 - p_none);
}

double convergence_bound(const Instance& instance, int horizon) {
    if (!instance.all_discrete())
        throw std::invalid_argument("convergence_bound requires bounded discrete priors");
    const double w_star = DpOracle::w_star(instance);
    const double eta = neg_mean_magnitude(instance);
    const double inv_delta = expected_inverse_delta(instance);
    const double k = static_cast<double>(instance.num_arms());
    return (1.0 - k * (1.0 + eta * inv_delta) / static_cast<double>(horizon)) * w_star;
}

}  // namespace mirplan
