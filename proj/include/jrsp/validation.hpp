#pragma once

// Independent oracles and randomized cross-check suites. Everything here
// is deliberately simple-minded: enumeration, grids, and finite
// differences, kept apart from the solver's own code paths.

#include "jrsp/bcp.hpp"
#include "jrsp/model.hpp"
#include "jrsp/pricing.hpp"
#include "jrsp/sop.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace jrsp::validation {

// Exhaustive global optimum: every customer subset ordered every way
// (costs via sop::optimal_route_cost), then partitioned into at most K
// routes. Guarded to n <= 8. +inf when infeasible.
double best_partition_cost(const Instance& inst);

// Exhaustive pricing oracle: all variant-feasible walks (n <= 4) crossed
// with all (I, s_bar) patterns via sop::pattern_cost. Returns the most
// negative reduced cost, or +inf when no triple is feasible.
double enumerate_pricing_best_rc(const Instance& inst, const pricing::DualValues& duals,
                                 pricing::RouteVariant variant);

// Flat copies (parent pointers cleared) of labels reachable within
// max_len extensions, dominance off. `open_only` keeps Case-4 material.
std::vector<pricing::Label> collect_labels(const Instance& inst,
                                           const pricing::DualValues& duals,
                                           pricing::RouteVariant variant, int max_len,
                                           bool open_only);

// Grid maximization of psi over S_v2 (the z* oracle).
double grid_psi_max(const Instance& inst, const pricing::Label& L1, const pricing::Label& L2,
                    double step = 1e-4);

// Direct check of the dominance speed condition on a v2 grid, with the inner
// v1 choice in closed form.
bool grid_condition4(const Instance& inst, const pricing::Label& L1, const pricing::Label& L2,
                     double step = 1e-3);

struct SuiteResult {
    int trials = 0;
    int failures = 0;
    double worst_gap = 0.0;
    std::string note;
    bool ok() const { return failures == 0; }
};

// sop.optimal_route_cost vs brute_force_oracle on random routes; collects
// the optimal profiles (with their instances) for structure checks.
struct ProfileSample {
    Instance instance;
    sop::Route route;
    sop::SpeedProfile profile;
};
SuiteResult sop_agreement_suite(int trials, int h_max, std::uint64_t seed, double rel_tol,
                                std::vector<ProfileSample>* profiles = nullptr);

// solve_bcp vs best_partition_cost on random small instances.
SuiteResult bcp_oracle_suite(int trials, int n_max, int k_max, std::uint64_t seed, double abs_tol,
                             std::vector<ProfileSample>* profiles = nullptr,
                             std::vector<bcp::Solution>* solutions = nullptr);

// pricing with dominance on vs off on random duals.
SuiteResult dominance_onoff_suite(int trials, int n_max, std::uint64_t seed, double tol,
                                  bool with_wage = false);

// Uniform-speed structure: interior-start customers have equal in/out
// speeds within tol.
int count_structure_violations(const std::vector<ProfileSample>& profiles, double tol);

}  // namespace jrsp::validation
