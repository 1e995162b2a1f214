#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mirplan/bic.hpp"
#include "mirplan/dp_oracle.hpp"
#include "mirplan/io.hpp"
#include "mirplan/policies.hpp"
#include "mirplan/simulator.hpp"

namespace {

using namespace mirplan;

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitConfigError = 2;

struct GenerateSpec {
    int k = 4;
    std::string family = "gaussian";
    std::uint64_t seed = 1;
};

GenerateSpec parse_generate(const std::vector<std::string>& tokens) {
    GenerateSpec spec;
    for (const auto& tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--generate", "expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "K" || key == "k") spec.k = std::stoi(value);
        else if (key == "family") spec.family = value;
        else if (key == "seed") spec.seed = std::stoull(value);
        else throw CLI::ValidationError("--generate", "unknown key '" + key + "'");
    }
    return spec;
}

struct InstanceSource {
    std::string path;
    std::vector<std::string> generate_tokens;
    mutable std::optional<std::uint64_t> file_seed;

    Instance resolve() const {
        if (!path.empty()) {
            auto file = load_instance_file(path);
            file_seed = file.seed;
            return std::move(file.instance);
        }
        if (!generate_tokens.empty()) {
            const GenerateSpec spec = parse_generate(generate_tokens);
            Rng rng(spec.seed);
            return generate_instance(spec.k, family_template_by_name(spec.family), rng);
        }
        throw CLI::ValidationError("instance", "provide --instance or --generate");
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--instance", path, "Instance file path");
        cmd->add_option("--generate", generate_tokens,
                        "Generate an instance: K=<n> family=<gaussian|two_point|discrete> seed=<s>")
            ->expected(1, 3);
    }
};

TerminalRewardMode parse_terminal_mode(const std::string& text, std::uint64_t seed) {
    if (text == "exact") return TerminalRewardMode::exact();
    if (text.rfind("mc:", 0) == 0)
        return TerminalRewardMode::monte_carlo(seed, std::stoi(text.substr(3)));
    throw CLI::ValidationError("--terminal-mode", "expected exact or mc:<n>");
}

int cmd_solve(const InstanceSource& source, const std::string& mode_text, const std::string& out,
              std::uint64_t seed) {
    const Instance instance = source.resolve();
    const TerminalRewardMode mode = parse_terminal_mode(mode_text, seed);
    const DpSolution solution = DpOracle::solve(instance, mode);
    OgpPolicy ogp(instance);
    const StateSet full = StateSet::full(instance.num_arms());

    // Evaluate the index policy over its reach distribution; in Monte Carlo
    // mode also propagate the per-terminal standard errors so the pass gate
    // scales with the sampling noise.
    double ogp_value = 0.0, ogp_variance = 0.0;
    for (const auto& [terminal, mass] : reach_probabilities(instance, ogp.as_fn(), full)) {
        double se = 0.0;
        ogp_value += mass * terminal_reward(instance, terminal, mode, &se);
        ogp_variance += mass * mass * se * se;
    }
    const double diff = std::abs(ogp_value - solution.w_star_full());
    const double tolerance = mode.kind == TerminalRewardMode::Kind::ExactDiscrete
                                 ? 1e-9
                                 : std::max(1e-9, 6.0 * std::sqrt(ogp_variance));
    const bool ordered = instance.neg_arms_stochastically_ordered();

    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw CLI::ValidationError("--out", "cannot write " + out);
        os << solution.serialize();
    }
    std::cout << "instance: " << instance.name() << " K=" << instance.num_arms() << "\n"
              << "w_star(A)    = " << format_double(solution.w_star_full()) << "\n"
              << "w(OGP, A)    = " << format_double(ogp_value) << "\n"
              << "difference   = " << format_double(diff) << " (tolerance "
              << format_double(tolerance) << ")\n"
              << "neg arms stochastically ordered: " << (ordered ? "yes" : "no") << "\n";
    if (diff <= tolerance) return kExitOk;
    if (!ordered) {
        std::cout << "OGP suboptimal (Assumption 1 violated)\n";
        return kExitVerificationFailure;
    }
    std::cout << "OGP/DP mismatch on a stochastically ordered instance\n";
    return kExitVerificationFailure;
}

int cmd_simulate(const InstanceSource& source, const std::string& mechanism_text,
                 std::vector<int> horizons, long long replications, std::uint64_t seed,
                 bool seed_given, const std::string& out, const std::string& trace_out,
                 int threads) {
    const Instance instance = source.resolve();
    // A seed recorded in the instance file is the replay default.
    if (!seed_given && source.file_seed) seed = *source.file_seed;
    const Mechanism mech = mechanism_by_name(mechanism_text);
    if (horizons.empty()) throw CLI::ValidationError("--horizons", "at least one horizon");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (horizons[i] <= horizons[i - 1])
            throw CLI::ValidationError("--horizons", "horizons must be strictly increasing");

    if (mech == Mechanism::BicIregb) {
        for (const auto& err :
             {check_assumption_dominance(instance), check_assumption_default_superior(instance),
              check_assumption_support(instance)})
            if (!err.empty()) throw CLI::ValidationError("--mechanism", err);
    }

    std::vector<WelfareRow> rows;
    for (int horizon : horizons) {
        const WelfareEstimate est =
            estimate_welfare(instance, mech, horizon, replications, seed, threads);
        WelfareRow row;
        row.instance_id = instance.name();
        row.mechanism = mechanism_name(mech);
        row.horizon = horizon;
        row.replications = replications;
        row.mean = est.mean;
        row.std_error = est.std_error;
        row.bound = (mech != Mechanism::BicIregb && instance.all_discrete() &&
                     instance.num_arms() <= DpOracle::kMaxArms)
                        ? convergence_bound(instance, horizon)
                        : std::nan("");
        rows.push_back(row);
    }
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw CLI::ValidationError("--out", "cannot write " + out);
        write_welfare_csv(rows, seed, os);
    } else {
        write_welfare_csv(rows, seed, std::cout);
    }
    if (!trace_out.empty()) {
        std::ofstream os(trace_out);
        if (!os) throw CLI::ValidationError("--trace-out", "cannot write " + trace_out);
        Rng rng = Rng::derive(seed, 0);
        const int horizon = horizons.front();
        if (mech == Mechanism::BicIregb) write_trace_jsonl(run_bic_iregb(instance, horizon, rng), os);
        else if (mech == Mechanism::IregbPrime) write_trace_jsonl(run_iregb_prime(instance, horizon, rng), os);
        else write_trace_jsonl(run_iregb(instance, horizon, rng), os);
    }
    return kExitOk;
}

// Finite-discrete arms with deliberately crossing CDFs; Assumption 1 fails
// with high probability.
Instance generate_unordered(int k, Rng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<RewardPrior> arms;
        arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.5 + 0.4 * rng.uniform01()));
        for (int i = 1; i < k; ++i) {
            const double down = 0.5 + 4.0 * rng.uniform01();
            const double up = 0.5 + 4.0 * rng.uniform01();
            const double p_up = 0.05 + 0.5 * rng.uniform01();
            const double mean = p_up * up - (1.0 - p_up) * down;
            if (std::abs(mean) < 1e-3 || mean > 0.0) {
                --i;
                continue;
            }
            arms.push_back(RewardPrior::finite_discrete({-down, up}, {1.0 - p_up, p_up}));
        }
        Instance instance(std::move(arms), RewardPrior::point_mass(0.0), "unordered");
        if (!instance.neg_arms_stochastically_ordered()) return instance;
    }
    throw std::runtime_error("failed to generate an unordered instance");
}

int cmd_verify(const std::string& suite, int count, std::uint64_t seed,
               const std::string& generator, int threads, const std::string& out) {
    int failures = 0;
    int expected_failures = 0;
    Rng meta(seed);

    const auto report = [&](const std::string& what, bool ok, bool expected_to_fail = false) {
        if (ok) {
            std::cout << "  pass: " << what << "\n";
        } else if (expected_to_fail) {
            ++expected_failures;
            std::cout << "  expected failure (unordered generator): " << what << "\n";
        } else {
            ++failures;
            std::cout << "  FAIL: " << what << "\n";
        }
    };

    if (suite == "equivalence") {
        for (int it = 0; it < count; ++it) {
            const int k = 2 + static_cast<int>(meta.below(7));
            Instance instance = generate_instance(k, TwoPointTemplate{}, meta);
            const PolicyTable a = random_pvalid(instance, meta.next_u64());
            const PolicyTable b = random_pvalid(instance, meta.next_u64());
            double max_diff = 0.0;
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
                const StateSet s(mask);
                max_diff = std::max(max_diff, std::abs(q_value(instance, a.as_fn(), s) -
                                                       q_value(instance, b.as_fn(), s)));
            }
            report("instance " + std::to_string(it) + " max |Q diff| = " + format_double(max_diff),
                   max_diff <= 1e-12);
        }
    } else if (suite == "ogp-optimality") {
        const bool unordered = generator == "unordered";
        for (int it = 0; it < count; ++it) {
            const int k = unordered ? 3 + static_cast<int>(meta.below(4))
                                    : 2 + static_cast<int>(meta.below(5));
            Instance instance = unordered ? generate_unordered(k, meta)
                                          : generate_instance(k, DiscreteMixtureTemplate{}, meta);
            const double w_star = DpOracle::w_star(instance);
            OgpPolicy ogp(instance);
            const double w_ogp =
                w_value(instance, ogp.as_fn(), StateSet::full(instance.num_arms()));
            const double diff = std::abs(w_ogp - w_star);
            report("instance " + std::to_string(it) + " |w(OGP) - w_star| = " +
                       format_double(diff),
                   diff <= 1e-9, unordered);
        }
    } else if (suite == "mir-certificates") {
        for (int it = 0; it < count; ++it) {
            Instance instance = generate_instance(4, TwoPointTemplate{}, meta);
            double worst = 0.0;
            for (int rep = 0; rep < 200; ++rep) {
                Rng rng = Rng::derive(seed + 7919, static_cast<std::uint64_t>(it * 200 + rep));
                const SimTrace trace = run_iregb(instance, 60, rng);
                for (const auto& round : trace.rounds)
                    worst = std::min(worst, round.certificate);
            }
            report("instance " + std::to_string(it) + " min certificate = " +
                       format_double(worst),
                   worst >= -1e-9);
        }
    } else if (suite == "dominance") {
        for (int it = 0; it < count; ++it) {
            const int k = 2 + static_cast<int>(meta.below(7));
            Instance instance = generate_instance(k, DiscreteMixtureTemplate{}, meta);
            report("instance " + std::to_string(it) + " neg arms totally ordered",
                   instance.neg_arms_stochastically_ordered());
        }
    } else if (suite == "bic-audit") {
        std::vector<RewardPrior> arms;
        arms.push_back(RewardPrior::two_point(-1.0, 2.0, 0.55));
        arms.push_back(RewardPrior::two_point(-1.0, 2.0, 0.5));
        Instance instance(std::move(arms),
                          RewardPrior::finite_discrete({-1.2, 0.02, 1.5}, {0.1, 0.3, 0.6}),
                          "bic-verify");
        const auto audit = audit_bic(instance, Mechanism::BicIregb, 40,
                                     count * 10000LL, seed, BeliefMode::InformativeOrder, threads);
        if (!out.empty()) {
            std::ofstream os(out);
            if (!os) throw CLI::ValidationError("--out", "cannot write " + out);
            write_audit_csv(audit, seed, os);
        }
        report("bic audit flagged cells = " + std::to_string(audit.flagged_count),
               audit.flagged_count == 0);
        // Power check on a zero-default instance, where the plain mechanism's
        // first round mixes a below-threshold arm.
        std::vector<RewardPrior> plain_arms;
        plain_arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.6));
        plain_arms.push_back(RewardPrior::two_point(-1.0, 1.0, 0.3));
        Instance plain(std::move(plain_arms), RewardPrior::point_mass(0.0), "bic-verify-power");
        const auto power = audit_bic(plain, Mechanism::Iregb, 5, 20000,
                                     seed, BeliefMode::InformativeOrder, threads);
        report("auditor power on raw mechanism (flagged cells > 0)", power.flagged_count > 0);
    } else {
        throw CLI::ValidationError("suite", "unknown suite '" + suite + "'");
    }

    if (expected_failures > 0)
        std::cout << expected_failures << " expected failure(s) under the unordered generator\n";
    return failures == 0 ? kExitOk : kExitVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIR exploration planning and simulation toolkit"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "Subset DP oracle vs the index policy");
    InstanceSource solve_source;
    solve_source.attach(solve);
    std::string solve_mode = "exact";
    std::string solve_out;
    std::uint64_t solve_seed = 1;
    solve->add_option("--terminal-mode", solve_mode, "exact or mc:<n>");
    solve->add_option("--out", solve_out, "Write the DP table (text)");
    solve->add_option("--seed", solve_seed, "Seed for mc terminal mode");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Finite-horizon mechanism runs");
    InstanceSource sim_source;
    sim_source.attach(simulate);
    std::string mechanism = "iregb";
    std::vector<int> horizons{1000};
    long long replications = 1000;
    std::uint64_t sim_seed = 1;
    std::string sim_out, trace_out;
    int threads = 0;
    simulate->add_option("--mechanism", mechanism, "iregb | iregb_prime | bic_iregb");
    simulate->add_option("--horizons", horizons, "Strictly increasing horizon list")->delimiter(',');
    simulate->add_option("--replications", replications, "Replication count");
    auto* sim_seed_opt =
        simulate->add_option("--seed", sim_seed, "Base seed (defaults to the instance file seed)");
    simulate->add_option("--out", sim_out, "Welfare CSV path (stdout if omitted)");
    simulate->add_option("--trace-out", trace_out, "JSON-lines trace of replication 0");
    simulate->add_option("--threads", threads, "Worker threads (0 = hardware)");

    // verify
    auto* verify = app.add_subcommand("verify", "Property suites");
    std::string suite;
    int count = 100;
    std::uint64_t verify_seed = 1;
    std::string generator = "ordered";
    int verify_threads = 0;
    verify->add_option("suite", suite,
                       "equivalence | ogp-optimality | mir-certificates | dominance | bic-audit")
        ->required();
    verify->add_option("--count", count, "Number of random instances");
    verify->add_option("--seed", verify_seed, "Base seed");
    verify->add_option("--generator", generator, "ordered | unordered (ogp-optimality)");
    verify->add_option("--threads", verify_threads, "Worker threads");
    std::string verify_out;
    verify->add_option("--out", verify_out, "Audit report CSV path (bic-audit)");

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve(solve_source, solve_mode, solve_out, solve_seed);
        if (simulate->parsed())
            return cmd_simulate(sim_source, mechanism, horizons, replications, sim_seed,
                                sim_seed_opt->count() > 0, sim_out, trace_out, threads);
        return cmd_verify(suite, count, verify_seed, generator, verify_threads, verify_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerificationFailure;
    }
}
