#pragma once

// Command-line front end: solve, fixed-route evaluation, oracle
// validation, instance generation.

#include "jrsp/bcp.hpp"
#include "jrsp/model.hpp"

#include <iosfwd>
#include <string>

namespace jrsp::cli {

// exit codes
inline constexpr int kExitOptimal = 0;
inline constexpr int kExitFeasible = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitTimeLimit = 3;
inline constexpr int kExitUsage = 64;

struct RunReport {
    std::string instance_id;
    std::string options_echo;
    bcp::Solution solution;
    bool revalidated = false;

    std::string to_json(bool include_timings = true) const;
    std::string to_csv() const;
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jrsp::cli
