#pragma once

// Forward labeling algorithm for the pricing problem, with the
// case-split dominance machinery.

#include "jrsp/convex1d.hpp"
#include "jrsp/model.hpp"
#include "jrsp/sop.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace jrsp::pricing {

enum class RouteVariant { Elementary, TwoCycleFree, QRoute };

struct DualValues {
    std::vector<double> mu;                        // per-customer duals, index 1..n
    double nu = 0.0;                               // convexity-row dual
    std::vector<std::vector<double>> arc_dual;     // aggregated cut + branching duals

    static DualValues zero(const Instance& inst);
    double arc(int i, int j) const {
        return arc_dual.empty() ? 0.0 : arc_dual[i][j];
    }
};

// How a label came to its last vertex. ActiveA/ActiveB (and Init) imply
// the last vertex is the last known active customer.
enum class LabelKind : std::uint8_t { Init, ActiveA, ActiveB, Seamless };

struct Label {
    const Label* parent = nullptr;
    int last = 0;      // current vertex i_h
    int w_vertex = 0;  // last known active customer i_w
    LabelKind kind = LabelKind::Init;
    int len = 0;       // customers on the walk

    double s = 0.0;        // service start at i_w (0 at depot)
    double load = 0.0;     // q(P)
    double dual_sum = 0.0; // mu(P) plus arc-level duals along P
    double Gamma = 0.0;    // service time from i_w through i_h
    double D = 0.0;        // distance from i_w to i_h
    double F_speed = 0.0;  // committed cost before i_w's outgoing segment
    double route_dist = 0.0;  // distance from the depot along the whole walk
    double seg_speed = 0.0;   // committed speed of the segment ending here (ActiveA/B)
    std::uint64_t M = 0;      // forbidden-vertex bitmask

    bool w_at_last() const { return kind != LabelKind::Seamless; }
    bool forbids(int j) const { return (M >> j) & 1ULL; }

    convex1d::SpeedWindow S_v;

    // Service finish time at i_h when traveling at v from i_w: s + Gamma + D/v.
    double T(double v) const { return s + Gamma + (D > 0.0 ? D / v : 0.0); }
    // Fuel (+ load constants) up to i_h at uniform speed v: F_speed + D f(v).
    double C(double v, const CostFunction& cost) const {
        return F_speed + (D > 0.0 ? D * cost.rate(v) : 0.0);
    }
};

Label init_label(const Instance& inst);

// Up to three labels (j active at a_j, at b_j, or seamless). Labels whose
// 1-D subproblem is infeasible or whose speed window empties are not
// emitted. Preconditions j not in M and load + q_j <= Q are checked here.
std::vector<Label> extend_label(const Instance& inst, const Label& L, int j,
                                const DualValues& duals, RouteVariant variant);

struct TerminatedColumn {
    sop::Route route;
    sop::Pattern pattern;
    sop::SpeedProfile profile;
    double cost = 0.0;          // c_L
    double reduced_cost = 0.0;  // c_L - dual_sum - arc_dual[last][0] - nu
};

// Extend L back to the depot (arrival at most b_0) and reconstruct the
// column from the parent chain. Empty when the depot return is infeasible.
std::optional<TerminatedColumn> terminate_label(const Instance& inst, const Label& L,
                                                const DualValues& duals);

// Dominance test: true only when L2 can be discarded. Strict in
// the cost comparison, so dominates(L, L) is always false.
bool dominates(const Instance& inst, const Label& L1, const Label& L2);

// Case-4 interval maximum of psi. Both labels must have their last known
// active customer strictly before the last vertex and satisfy
// T1(v1max) <= T2(v2max); violations raise std::logic_error.
double z_star(const Instance& inst, const Label& L1, const Label& L2);

struct PricingLimits {
    int max_columns = 60;
    double bucket_granularity = 1.0;
    bool use_dominance = true;
    // Heuristic pass: stop once heuristic_exit_after columns priced below
    // -heuristic_eps are found (0 picks 4x max_columns), then return the
    // most negative max_columns of them. Exactness is only claimed by a
    // full run.
    bool heuristic_pass = false;
    int heuristic_exit_after = 0;
    double heuristic_eps = 1e-4;
    double eps_rc = 1e-6;
};

struct PricingResult {
    std::vector<TerminatedColumn> columns;  // most negative first, capped at max_columns
    bool exhaustive = false;                // ran to completion (no early exit)
    std::int64_t labels_created = 0;
    std::int64_t labels_dominated = 0;
};

// Label-setting DP over (load, walk length). `forbidden_arcs`, when
// present, removes arcs from the pricing graph (branching).
PricingResult solve_pricing(const Instance& inst, const DualValues& duals, RouteVariant variant,
                            const PricingLimits& limits,
                            const std::vector<std::vector<char>>* forbidden_arcs = nullptr);

}  // namespace jrsp::pricing
