#pragma once

// Branch-cut-and-price tree driver.

#include "jrsp/master.hpp"
#include "jrsp/model.hpp"
#include "jrsp/pricing.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace jrsp::bcp {

enum class NodeSelection { BestBound, Dfs };

struct BcpOptions {
    pricing::RouteVariant variant = pricing::RouteVariant::Elementary;
    double time_limit = 600.0;  // seconds
    bool cuts_on = true;
    int max_cols_per_iter = 60;
    NodeSelection node_selection = NodeSelection::BestBound;
    int max_cut_rounds_per_node = 5;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, TimeLimit };

std::string to_string(SolveStatus s);

struct SolvedRoute {
    std::vector<int> seq;
    sop::SpeedProfile profile;
    double cost = 0.0;
};

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    double blb = 0.0;
    double bub = 0.0;
    std::vector<SolvedRoute> routes;
    bool revalidated = false;  // incumbent recomputed through sop within 1e-6

    struct Stats {
        std::int64_t nodes = 0;
        std::int64_t columns = 0;
        std::int64_t cuts = 0;
        std::int64_t cg_iterations = 0;
        double root_lp = 0.0;
        double seconds = 0.0;
        double lp_seconds = 0.0;
        double pricing_seconds = 0.0;
    } stats;
};

Solution solve_bcp(const Instance& inst, const BcpOptions& options);

// Column-generation bound at the root only (no cuts unless cuts_on).
double root_lower_bound(const Instance& inst, const BcpOptions& options);

}  // namespace jrsp::bcp
