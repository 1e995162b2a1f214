#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mirplan/bic.hpp"
#include "mirplan/instance.hpp"
#include "mirplan/simulator.hpp"

namespace mirplan {

struct InstanceFile {
    Instance instance;
    std::optional<std::uint64_t> seed;
};

// Line-oriented human-editable format:
//   arm two_point lo=-1 hi=1 p_hi=0.6
//   arm finite_discrete values=-2,0.5,1 probs=0.5,0.2,0.3
//   arm gaussian mean=2 sigma=1
//   default point_mass value=0
//   seed 42
// Parse errors carry "<source>:<line>: <message>".
InstanceFile parse_instance_text(const std::string& text, const std::string& source_name);
InstanceFile load_instance_file(const std::string& path);
std::string format_instance(const Instance& instance, std::optional<std::uint64_t> seed = {});
void save_instance_file(const Instance& instance, const std::string& path,
                        std::optional<std::uint64_t> seed = {});

// One JSON object per round: t, portfolio, arm, reward, phase, certificate.
void write_trace_jsonl(const SimTrace& trace, std::ostream& out);
void write_trace_jsonl(const BicTrace& trace, std::ostream& out);

struct WelfareRow {
    std::string instance_id;
    std::string mechanism;
    int horizon = 0;
    long long replications = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double bound = 0.0;  // NaN when unavailable
};

void write_welfare_csv(const std::vector<WelfareRow>& rows, std::uint64_t seed,
                       std::ostream& out);
void write_audit_csv(const BicAuditReport& report, std::uint64_t seed, std::ostream& out);

std::string format_double(double value);  // shortest round-trip style, %.17g

}  // namespace mirplan
