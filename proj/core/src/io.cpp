#include "mirplan/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mirplan {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& message) {
    std::ostringstream os;
    os << source << ":" << line << ": " << message;
    throw std::invalid_argument(os.str());
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (is >> tok) tokens.push_back(tok);
    return tokens;
}

std::vector<double> parse_double_list(const std::string& source, int line, const std::string& s) {
    std::vector<double> values;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            parse_fail(source, line, "bad number '" + item + "'");
        }
    }
    if (values.empty()) parse_fail(source, line, "empty number list");
    return values;
}

// key=value fields after the family name.
std::map<std::string, std::string> parse_fields(const std::string& source, int line,
                                                const std::vector<std::string>& tokens,
                                                std::size_t first) {
    std::map<std::string, std::string> fields;
    for (std::size_t i = first; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0)
            parse_fail(source, line, "expected key=value, got '" + tokens[i] + "'");
        fields[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
    }
    return fields;
}

double field_double(const std::string& source, int line,
                    const std::map<std::string, std::string>& fields, const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) parse_fail(source, line, "missing field '" + key + "'");
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        parse_fail(source, line, "bad number for '" + key + "'");
    }
}

RewardPrior parse_prior(const std::string& source, int line,
                        const std::vector<std::string>& tokens) {
    const std::string& family = tokens[1];
    const auto fields = parse_fields(source, line, tokens, 2);
    try {
        if (family == "point_mass")
            return RewardPrior::point_mass(field_double(source, line, fields, "value"));
        if (family == "two_point")
            return RewardPrior::two_point(field_double(source, line, fields, "lo"),
                                          field_double(source, line, fields, "hi"),
                                          field_double(source, line, fields, "p_hi"));
        if (family == "gaussian")
            return RewardPrior::gaussian(field_double(source, line, fields, "mean"),
                                         field_double(source, line, fields, "sigma"));
        if (family == "finite_discrete") {
            const auto vit = fields.find("values");
            const auto pit = fields.find("probs");
            if (vit == fields.end()) parse_fail(source, line, "missing field 'values'");
            if (pit == fields.end()) parse_fail(source, line, "missing field 'probs'");
            return RewardPrior::finite_discrete(parse_double_list(source, line, vit->second),
                                                parse_double_list(source, line, pit->second));
        }
    } catch (const std::invalid_argument& e) {
        // Re-tag constructor diagnostics with the position.
        if (std::string(e.what()).rfind(source, 0) == 0) throw;
        parse_fail(source, line, e.what());
    }
    parse_fail(source, line, "unknown family '" + family + "'");
}

}  // namespace

InstanceFile parse_instance_text(const std::string& text, const std::string& source) {
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    std::vector<RewardPrior> arms;
    std::optional<RewardPrior> default_arm;
    std::optional<std::uint64_t> seed;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string stripped = hash == std::string::npos ? raw : raw.substr(0, hash);
        const auto tokens = split_ws(stripped);
        if (tokens.empty()) continue;
        const std::string& kind = tokens[0];
        if (kind == "arm") {
            if (tokens.size() < 2) parse_fail(source, line, "arm needs a family");
            arms.push_back(parse_prior(source, line, tokens));
        } else if (kind == "default") {
            if (tokens.size() < 2) parse_fail(source, line, "default needs a family");
            if (default_arm) parse_fail(source, line, "duplicate default");
            default_arm = parse_prior(source, line, tokens);
        } else if (kind == "seed") {
            if (tokens.size() != 2) parse_fail(source, line, "seed needs one value");
            try {
                seed = std::stoull(tokens[1]);
            } catch (const std::exception&) {
                parse_fail(source, line, "bad seed '" + tokens[1] + "'");
            }
        } else {
            parse_fail(source, line, "unknown directive '" + kind + "'");
        }
    }
    if (arms.empty()) parse_fail(source, line, "no arms declared");
    if (!default_arm) default_arm = RewardPrior::point_mass(0.0);
    try {
        return InstanceFile{Instance(std::move(arms), std::move(*default_arm), source), seed};
    } catch (const std::invalid_argument& e) {
        parse_fail(source, line, e.what());
    }
}

InstanceFile load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance_text(buf.str(), path);
}

namespace {

void format_prior(const RewardPrior& prior, std::ostream& out) {
    if (const auto* pm = std::get_if<PointMass>(&prior.family())) {
        out << "point_mass value=" << format_double(pm->value);
    } else if (const auto* tp = std::get_if<TwoPoint>(&prior.family())) {
        out << "two_point lo=" << format_double(tp->lo) << " hi=" << format_double(tp->hi)
            << " p_hi=" << format_double(tp->p_hi);
    } else if (const auto* fd = std::get_if<FiniteDiscrete>(&prior.family())) {
        out << "finite_discrete values=";
        for (std::size_t i = 0; i < fd->values.size(); ++i)
            out << (i ? "," : "") << format_double(fd->values[i]);
        out << " probs=";
        for (std::size_t i = 0; i < fd->probs.size(); ++i)
            out << (i ? "," : "") << format_double(fd->probs[i]);
    } else {
        const auto& g = std::get<GaussianCommonVar>(prior.family());
        out << "gaussian mean=" << format_double(g.mean) << " sigma=" << format_double(g.sigma);
    }
}

}  // namespace

std::string format_instance(const Instance& instance, std::optional<std::uint64_t> seed) {
    std::ostringstream os;
    for (int i = 0; i < instance.num_arms(); ++i) {
        os << "arm ";
        format_prior(instance.arm(i), os);
        os << "\n";
    }
    os << "default ";
    format_prior(instance.default_arm(), os);
    os << "\n";
    if (seed) os << "seed " << *seed << "\n";
    return os.str();
}

void save_instance_file(const Instance& instance, const std::string& path,
                        std::optional<std::uint64_t> seed) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write instance file: " + path);
    out << format_instance(instance, seed);
}

namespace {

void write_portfolio_json(const Portfolio& p, std::ostream& out) {
    out << "[";
    bool first = true;
    for (const auto& [arm, w] : p.entries()) {
        if (!first) out << ",";
        first = false;
        out << "[" << arm << "," << format_double(w) << "]";
    }
    out << "]";
}

}  // namespace

void write_trace_jsonl(const SimTrace& trace, std::ostream& out) {
    for (const auto& r : trace.rounds) {
        out << "{\"t\":" << r.t << ",\"portfolio\":";
        write_portfolio_json(r.portfolio, out);
        out << ",\"arm\":" << r.arm << ",\"reward\":" << format_double(r.reward) << ",\"phase\":\""
            << phase_label(r.phase) << "\",\"certificate\":" << format_double(r.certificate)
            << "}\n";
    }
}

void write_trace_jsonl(const BicTrace& trace, std::ostream& out) {
    for (const auto& r : trace.rounds) {
        out << "{\"t\":" << r.t << ",\"portfolio\":";
        write_portfolio_json(r.portfolio, out);
        out << ",\"arm\":" << r.recommendation << ",\"reward\":" << format_double(r.reward)
            << ",\"phase\":\"" << phase_label(r.engine_phase)
            << "\",\"certificate\":" << format_double(r.certificate)
            << ",\"phase_index\":" << r.phase_index
            << ",\"explorer\":" << (r.explorer ? "true" : "false") << "}\n";
    }
}

void write_welfare_csv(const std::vector<WelfareRow>& rows, std::uint64_t seed,
                       std::ostream& out) {
    out << "# seed=" << seed << "\n";
    out << "instance,mechanism,T,replications,mean,stderr,bound\n";
    for (const auto& r : rows) {
        out << r.instance_id << "," << r.mechanism << "," << r.horizon << "," << r.replications
            << "," << format_double(r.mean) << "," << format_double(r.std_error) << ","
            << (std::isnan(r.bound) ? std::string("") : format_double(r.bound)) << "\n";
    }
}

void write_audit_csv(const BicAuditReport& report, std::uint64_t seed, std::ostream& out) {
    out << "# seed=" << seed << "\n";
    out << "t,recommended,alternative,estimate,ci_low,ci_high,n,flag\n";
    for (const auto& c : report.cells) {
        out << c.t << "," << c.recommended << "," << c.alternative << ","
            << format_double(c.estimate) << "," << format_double(c.ci_low) << ","
            << format_double(c.ci_high) << "," << c.n << ","
            << (c.flagged ? "violation" : (c.sparse ? "sparse" : "ok")) << "\n";
    }
}

}  // namespace mirplan
