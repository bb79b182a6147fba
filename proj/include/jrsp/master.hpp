#pragma once

// Restricted master LP over generated columns, rounded-capacity cut
// separation, and branching-row management.

#include "jrsp/model.hpp"
#include "jrsp/pricing.hpp"
#include "jrsp/sop.hpp"

#include <cstdint>
#include <vector>

namespace jrsp::master {

struct ArcUse {
    int from = 0, to = 0;
    int count = 0;
};

struct Column {
    sop::Route route;
    sop::Pattern pattern;
    sop::SpeedProfile profile;
    double cost = 0.0;
    std::vector<int> alpha;    // visit counts per customer, size n+1, [0] unused
    std::vector<ArcUse> arcs;  // sparse beta_ijr

    static Column from_terminated(const Instance& inst, const pricing::TerminatedColumn& t);
    bool uses_arc(int i, int j) const;
    bool elementary() const;  // no customer visited twice
};

struct Cut {
    std::uint64_t set_mask = 0;  // customers in S as a bitmask
    double rhs = 0.0;            // xi(S)
    bool contains(int i) const { return (set_mask >> i) & 1ULL; }
    // Column coefficient: number of arcs of the route leaving S.
    int coefficient(const Column& col) const;
};

struct BranchDecision {
    int from = 0, to = 0;
    bool required = false;  // false: arc forbidden
};

struct LpResult {
    bool feasible = false;      // false when penalty artificials stay basic
    double objective = 0.0;
    std::vector<double> z;      // primal value per pool column (0 for inactive)
    double idle = 0.0;          // unused-vehicle slack in the convexity row
    pricing::DualValues duals;
};

class RmpState {
  public:
    explicit RmpState(const Instance& inst);

    const Instance& instance() const { return *inst_; }
    const std::vector<Column>& pool() const { return pool_; }
    const std::vector<char>& active() const { return active_; }
    const std::vector<Cut>& cuts() const { return cuts_; }
    const std::vector<BranchDecision>& decisions() const { return decisions_; }

    // Returns the pool index, or -1 if the column is a duplicate.
    int add_column(Column col);
    void add_cut(const Cut& cut);

    // Forbidden arcs deactivate pool columns and are excluded from the
    // pricing graph; required arcs add a ">= 1" row. Contradictory
    // decisions on one arc raise std::logic_error.
    void apply_branching(const BranchDecision& decision);
    // Reset branching state to a fresh node (keeps pool, cuts, column keys).
    void reset_decisions(const std::vector<BranchDecision>& decisions);

    const std::vector<std::vector<char>>& forbidden_arcs() const { return forbidden_; }

    // Solve the current LP (warm-started within a node). Partitioning rows
    // are ">= 1", the convexity row "= K" with an idle-vehicle slack.
    LpResult solve_rmp_lp();

    std::vector<std::vector<double>> compute_arc_values(const std::vector<double>& z) const;

    // Heuristic RCI separation: support components at threshold 0.1 plus
    // greedy growth, violation tolerance 0.01.
    std::vector<Cut> separate_rci(const std::vector<std::vector<double>>& x) const;

    double penalty() const { return penalty_; }
    std::int64_t lp_pivots() const { return pivots_; }

  private:
    void refresh_activity();

    const Instance* inst_;
    std::vector<Column> pool_;
    std::vector<char> active_;
    std::vector<std::uint64_t> column_keys_;
    std::vector<Cut> cuts_;
    std::vector<BranchDecision> decisions_;
    std::vector<std::vector<char>> forbidden_;
    double penalty_ = 0.0;
    std::int64_t pivots_ = 0;
};

}  // namespace jrsp::master
