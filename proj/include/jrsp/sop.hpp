#pragma once

// Fixed-route speed optimization: pattern costs, the full route optimum,
// and the grid oracle used for testing.

#include "jrsp/convex1d.hpp"
#include "jrsp/model.hpp"

#include <limits>
#include <vector>

namespace jrsp::sop {

// A walk (0, i_1, ..., i_h, 0) with h >= 1.
struct Route {
    std::vector<int> seq;

    Route() = default;
    explicit Route(std::vector<int> s) : seq(std::move(s)) {}

    int h() const { return static_cast<int>(seq.size()) - 2; }
    bool well_formed(const Instance& inst) const;
    double load(const Instance& inst) const;
    double total_distance(const Instance& inst) const;
};

// Per-arc speeds and the realized schedule. speed[k] is the speed on arc
// (seq[k], seq[k+1]); start[p] the service start at seq[p] (start[0] = 0,
// start[h+1] = depot return time); wait[p] the waiting before service.
struct SpeedProfile {
    std::vector<double> speed;
    std::vector<double> start;
    std::vector<double> wait;
};

struct PatternEval {
    bool feasible = false;
    double cost = std::numeric_limits<double>::infinity();
    SpeedProfile profile;
};

// A pattern: active positions (sorted, subset of 1..h+1) and, parallel to
// them, whether each is served at b (true) or a (false).
struct Pattern {
    std::vector<int> active;
    std::vector<char> at_b;
};

// Cost of the route under the pattern: the route decomposes into |I|+1
// uniform-speed segments, each solved as a 1-D convex problem subject to
// the intermediate windows. Infeasible when any segment is, or when the
// route load exceeds Q.
PatternEval pattern_cost(const Instance& inst, const Route& route, const Pattern& pattern);

struct RouteOpt {
    bool feasible = false;
    double cost = std::numeric_limits<double>::infinity();
    Pattern pattern;
    SpeedProfile profile;
};

// min over all patterns of pattern_cost, via a forward DP whose states
// mirror the three-way label extension restricted to this sequence.
RouteOpt optimal_route_cost(const Instance& inst, const Route& route);

struct OracleParams {
    double coarse_step = 0.25;
    int refine_rounds = 4;
};

// Independent testing oracle: per-arc speeds on a grid, times simulated
// with waiting allowed, grid refined around the incumbent. Returns +inf
// when no grid point is feasible.
double brute_force_oracle(const Instance& inst, const Route& route, const OracleParams& params);

}  // namespace jrsp::sop
