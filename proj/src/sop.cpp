#include "jrsp/sop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jrsp::sop {

using convex1d::ArrivalKind;
using convex1d::SpeedWindow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// gamma * sum over customers of demand * (distance from depot to the
// customer along the route) == per-arc carried-load cost for deliveries.
double load_term(const Instance& inst, const Route& route) {
    double g = inst.cost.load_coeff;
    if (g <= 0.0) return 0.0;
    double cum = 0.0, total = 0.0;
    for (std::size_t k = 1; k + 1 < route.seq.size(); ++k) {
        cum += inst.d(route.seq[k - 1], route.seq[k]);
        total += inst.demand_of(route.seq[k]) * cum;
    }
    return g * total;
}

}  // namespace

bool Route::well_formed(const Instance& inst) const {
    if (seq.size() < 3) return false;
    if (seq.front() != 0 || seq.back() != 0) return false;
    for (std::size_t k = 1; k + 1 < seq.size(); ++k)
        if (seq[k] < 1 || seq[k] > inst.n) return false;
    return true;
}

double Route::load(const Instance& inst) const {
    double q = 0.0;
    for (std::size_t k = 1; k + 1 < seq.size(); ++k) q += inst.demand_of(seq[k]);
    return q;
}

double Route::total_distance(const Instance& inst) const {
    double d = 0.0;
    for (std::size_t k = 1; k < seq.size(); ++k) d += inst.d(seq[k - 1], seq[k]);
    return d;
}

// ---------------------------------------------------------------------------
// pattern_cost

PatternEval pattern_cost(const Instance& inst, const Route& route, const Pattern& pattern) {
    PatternEval out;
    if (!route.well_formed(inst)) return out;
    if (route.load(inst) > inst.Q + 1e-9) return out;
    const int h = route.h();
    if (pattern.active.size() != pattern.at_b.size()) return out;
    for (std::size_t k = 0; k < pattern.active.size(); ++k) {
        if (pattern.active[k] < 1 || pattern.active[k] > h + 1) return out;
        if (k > 0 && pattern.active[k] <= pattern.active[k - 1]) return out;
    }

    const double l_eff = inst.speed_floor();
    const double u = inst.speed_hi;
    const double wage = inst.cost.wage_rate;

    // anchor state
    double s = 0.0;
    double Gamma = 0.0;
    double D = 0.0;
    SpeedWindow S = SpeedWindow::interval(l_eff, u);
    int anchor_pos = 0;

    std::vector<double> seg_speed(h + 2, 0.0);  // speed on arc (p-1, p)
    double fuel = 0.0;
    double wage_cost = 0.0;
    std::size_t next_active = 0;

    for (int p = 1; p <= h + 1; ++p) {
        const int j = route.seq[p];
        D += inst.d(route.seq[p - 1], j);
        const bool is_return = (p == h + 1);
        const double a_j = inst.vertex[j].a;
        const double b_j = inst.vertex[j].b;
        bool active = next_active < pattern.active.size() && pattern.active[next_active] == p;
        bool at_b = active && pattern.at_b[next_active];
        if (active) ++next_active;

        if (!active && is_return) {
            // Free depot return: fuel plus the wage on the open segment.
            auto r = convex1d::min_rate_cost(D, inst.cost, S, ArrivalKind::AtMost, b_j, s, Gamma,
                                             wage);
            if (!r.feasible) return out;
            for (int k = anchor_pos + 1; k <= p; ++k) seg_speed[k] = r.v;
            fuel += D * inst.cost.rate(r.v);
            if (wage > 0.0) wage_cost += wage * (s + Gamma + D / r.v);
            break;
        }
        if (active) {
            convex1d::SegmentResult r;
            double target = at_b ? b_j : a_j;
            if (at_b && !is_return) {
                r = convex1d::min_rate_cost(D, inst.cost, S, ArrivalKind::Exactly, b_j, s, Gamma);
            } else {
                // serve at a_j with waiting allowed at j; for the depot the
                // return-time variable sits at the boundary while the
                // physical arrival only needs to respect it
                r = convex1d::min_rate_cost(D, inst.cost, S, ArrivalKind::AtMost, target, s, Gamma);
            }
            if (!r.feasible) return out;
            for (int k = anchor_pos + 1; k <= p; ++k) seg_speed[k] = r.v;
            fuel += r.value;
            if (wage > 0.0 && is_return) wage_cost += wage * target;
            if (is_return) break;
            s = target;
            Gamma = inst.vertex[j].service;
            D = 0.0;
            S = SpeedWindow::interval(l_eff, u);
            anchor_pos = p;
        } else {
            S = convex1d::intersect_time_window(S, D, s + Gamma, a_j, b_j);
            if (S.empty()) return out;
            Gamma += inst.vertex[j].service;
        }
    }

    // schedule reconstruction from the committed speeds
    SpeedProfile prof;
    prof.speed.assign(h + 1, 0.0);
    prof.start.assign(h + 2, 0.0);
    prof.wait.assign(h + 2, 0.0);
    double t = 0.0;
    next_active = 0;
    for (int p = 1; p <= h + 1; ++p) {
        const int j = route.seq[p];
        prof.speed[p - 1] = seg_speed[p];
        double arr = t + inst.d(route.seq[p - 1], j) / seg_speed[p];
        bool active = next_active < pattern.active.size() && pattern.active[next_active] == p;
        bool at_b = active && pattern.at_b[next_active];
        if (active) ++next_active;
        double st;
        if (p == h + 1) {
            st = active ? (at_b ? inst.vertex[0].b : inst.vertex[0].a) : arr;
        } else if (active) {
            st = at_b ? inst.vertex[j].b : inst.vertex[j].a;
        } else {
            st = arr;
        }
        prof.start[p] = st;
        prof.wait[p] = std::max(0.0, st - arr);
        t = st + (p <= h ? inst.vertex[j].service : 0.0);
    }

    out.feasible = true;
    out.cost = fuel + wage_cost + load_term(inst, route);
    out.profile = std::move(prof);
    return out;
}

// ---------------------------------------------------------------------------
// optimal_route_cost: forward DP mirroring the three-way label extension

namespace {

struct DpNode {
    int pos = 0;
    // anchor: sigma 0 = active at a, 1 = active at b, 2 = depot start
    int sigma = 2;
    double F = kInf;
    double s = 0.0;
    double Gamma = 0.0;
    double D = 0.0;
    SpeedWindow S;
    int prev_commit = -1;  // arena index of the previous committed anchor
};

}  // namespace

RouteOpt optimal_route_cost(const Instance& inst, const Route& route) {
    RouteOpt out;
    if (!route.well_formed(inst)) return out;
    if (route.load(inst) > inst.Q + 1e-9) return out;
    const int h = route.h();
    const double l_eff = inst.speed_floor();
    const double u = inst.speed_hi;
    const double wage = inst.cost.wage_rate;

    std::vector<DpNode> arena;  // commit nodes only (actives + the depot start)
    arena.push_back(DpNode{0, 2, 0.0, 0.0, 0.0, 0.0, SpeedWindow::interval(l_eff, u), -1});

    // open states at the current position, keyed by commit-node index
    struct Open {
        int commit = 0;
        double F = 0.0;
        double s = 0.0, Gamma = 0.0, D = 0.0;
        SpeedWindow S;
    };
    std::vector<Open> states{Open{0, 0.0, 0.0, 0.0, 0.0, SpeedWindow::interval(l_eff, u)}};

    for (int p = 1; p <= h; ++p) {
        const int j = route.seq[p];
        const double a_j = inst.vertex[j].a;
        const double b_j = inst.vertex[j].b;
        const double dd = inst.d(route.seq[p - 1], j);
        std::vector<Open> next;
        double bestA = kInf, bestB = kInf;
        int bestAprev = -1, bestBprev = -1;
        for (const Open& st : states) {
            double D2 = st.D + dd;
            // close at a_j
            auto ra = convex1d::min_rate_cost(D2, inst.cost, st.S, ArrivalKind::AtMost, a_j, st.s,
                                              st.Gamma);
            if (ra.feasible && st.F + ra.value < bestA) {
                bestA = st.F + ra.value;
                bestAprev = st.commit;
            }
            // close at b_j
            auto rb = convex1d::min_rate_cost(D2, inst.cost, st.S, ArrivalKind::Exactly, b_j, st.s,
                                              st.Gamma);
            if (rb.feasible && st.F + rb.value < bestB) {
                bestB = st.F + rb.value;
                bestBprev = st.commit;
            }
            // seamless
            SpeedWindow S2 = convex1d::intersect_time_window(st.S, D2, st.s + st.Gamma, a_j, b_j);
            if (!S2.empty()) {
                Open o = st;
                o.D = D2;
                o.S = S2;
                o.Gamma += inst.vertex[j].service;
                next.push_back(o);
            }
        }
        if (bestA < kInf) {
            arena.push_back(DpNode{p, 0, bestA, a_j, 0.0, 0.0, SpeedWindow{}, bestAprev});
            next.push_back(Open{static_cast<int>(arena.size()) - 1, bestA, a_j,
                                inst.vertex[j].service, 0.0, SpeedWindow::interval(l_eff, u)});
        }
        if (bestB < kInf) {
            arena.push_back(DpNode{p, 1, bestB, b_j, 0.0, 0.0, SpeedWindow{}, bestBprev});
            next.push_back(Open{static_cast<int>(arena.size()) - 1, bestB, b_j,
                                inst.vertex[j].service, 0.0, SpeedWindow::interval(l_eff, u)});
        }
        states = std::move(next);
        if (states.empty()) return out;
    }

    // free depot return from every surviving state
    double best = kInf;
    int best_commit = -1;
    const double b0 = inst.vertex[0].b;
    const double dd = inst.d(route.seq[h], 0);
    for (const Open& st : states) {
        double D2 = st.D + dd;
        auto r = convex1d::min_rate_cost(D2, inst.cost, st.S, ArrivalKind::AtMost, b0, st.s,
                                         st.Gamma, wage);
        if (!r.feasible) continue;
        double total = st.F + D2 * inst.cost.rate(r.v);
        if (wage > 0.0) total += wage * (st.s + st.Gamma + D2 / r.v);
        if (total < best) {
            best = total;
            best_commit = st.commit;
        }
    }
    if (best_commit < 0) return out;

    Pattern pat;
    for (int c = best_commit; c > 0; c = arena[c].prev_commit) {
        pat.active.push_back(arena[c].pos);
        pat.at_b.push_back(arena[c].sigma == 1);
    }
    std::reverse(pat.active.begin(), pat.active.end());
    std::reverse(pat.at_b.begin(), pat.at_b.end());

    PatternEval ev = pattern_cost(inst, route, pat);
    out.feasible = ev.feasible;
    out.cost = ev.cost;
    out.pattern = std::move(pat);
    out.profile = std::move(ev.profile);
    return out;
}

// ---------------------------------------------------------------------------
// brute-force grid oracle

namespace {

struct GridState {
    double t;  // ready-to-depart time (service finished)
    double c;  // accumulated fuel
    int parent;
    double v;  // speed chosen on the arc into this state
};

void pareto_prune(std::vector<GridState>& v) {
    std::sort(v.begin(), v.end(), [](const GridState& a, const GridState& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.c < b.c;
    });
    std::vector<GridState> keep;
    double best_c = kInf;
    for (const auto& s : v) {
        if (s.c >= best_c - 1e-15) continue;  // dominated by an earlier-or-equal time
        if (!keep.empty() && s.t - keep.back().t < 1e-12)
            keep.back() = s;  // same time up to rounding, better cost
        else
            keep.push_back(s);
        best_c = s.c;
    }
    v = std::move(keep);
}

}  // namespace

double brute_force_oracle(const Instance& inst, const Route& route, const OracleParams& params) {
    if (!route.well_formed(inst)) return kInf;
    if (route.load(inst) > inst.Q + 1e-9) return kInf;
    const int h = route.h();
    const double l_eff = inst.speed_floor();
    const double u = inst.speed_hi;
    const double wage = inst.cost.wage_rate;
    const double extra = load_term(inst, route);

    // One shared speed grid for all arcs. Each round refines around a small
    // beam of near-best speed vectors from the previous round; pooling the
    // beam's speeds into a common grid lets equal-speed chains across
    // consecutive arcs refine together, and the coarse grid stays in the
    // union so refinement can move between basins.
    std::vector<double> coarse;
    for (double v = l_eff; v < u; v += params.coarse_step) coarse.push_back(v);
    coarse.push_back(u);
    std::vector<double> grid = coarse;
    const int beam_width = 8;

    double best = kInf;
    std::vector<std::vector<double>> beam;  // near-best speed vectors
    double step = params.coarse_step;

    for (int round = 0; round <= params.refine_rounds; ++round) {
        if (round > 0) {
            if (beam.empty()) break;  // nothing feasible to refine around
            double span = 1.25 * step;
            step /= 8.0;
            std::vector<double> centers;
            for (const auto& vec : beam)
                for (double c : vec) centers.push_back(c);
            std::sort(centers.begin(), centers.end());
            centers.erase(std::unique(centers.begin(), centers.end(),
                                      [](double a, double b) { return std::fabs(a - b) < 1e-9; }),
                          centers.end());
            if (centers.size() > 24) centers.resize(24);
            grid = coarse;
            for (double center : centers) {
                for (double v = std::max(l_eff, center - span);
                     v <= std::min(u, center + span) + 1e-12; v += step)
                    grid.push_back(std::min(v, u));
                grid.push_back(center);  // keep beam points exactly
            }
            std::sort(grid.begin(), grid.end());
            grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        }

        // DP over (ready time, fuel) with waiting allowed at customers
        std::vector<std::vector<GridState>> stages(h + 2);
        stages[0] = {GridState{0.0, 0.0, -1, 0.0}};
        bool dead = false;
        for (int p = 1; p <= h + 1 && !dead; ++p) {
            const int j = route.seq[p];
            const double dd = inst.d(route.seq[p - 1], j);
            const bool is_return = (p == h + 1);
            std::vector<GridState> next;
            next.reserve(stages[p - 1].size() * grid.size());
            for (int si = 0; si < static_cast<int>(stages[p - 1].size()); ++si) {
                const GridState& st = stages[p - 1][si];
                for (double v : grid) {
                    double arr = st.t + dd / v;
                    double cost = st.c + dd * inst.cost.rate(v);
                    if (is_return) {
                        if (arr > inst.vertex[0].b + 1e-9) continue;
                        next.push_back(GridState{arr, cost, si, v});
                    } else {
                        double start = std::max(arr, inst.vertex[j].a);
                        if (start > inst.vertex[j].b + 1e-9) continue;
                        next.push_back(GridState{start + inst.vertex[j].service, cost, si, v});
                    }
                }
            }
            if (next.empty()) dead = true;
            if (p <= h) pareto_prune(next);
            stages[p] = std::move(next);
        }
        if (dead) continue;

        auto reconstruct = [&](int final_idx) {
            std::vector<double> vec(h + 1, 0.0);
            int idx = final_idx;
            for (int p = h + 1; p >= 1; --p) {
                vec[p - 1] = stages[p][idx].v;
                idx = stages[p][idx].parent;
            }
            return vec;
        };

        std::vector<int> order(stages[h + 1].size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const auto& sa = stages[h + 1][a];
            const auto& sb = stages[h + 1][b];
            return sa.c + wage * sa.t < sb.c + wage * sb.t;
        });
        if (order.empty()) continue;

        std::vector<std::vector<double>> carry;
        if (!beam.empty()) carry.push_back(beam.front());  // global best so far
        beam.clear();
        {
            const auto& s0 = stages[h + 1][order[0]];
            double round_best = s0.c + wage * s0.t;
            if (round_best < best) best = round_best;
        }
        for (int idx : order) {
            if (static_cast<int>(beam.size()) >= beam_width) break;
            auto vec = reconstruct(idx);
            bool dup = false;
            for (const auto& other : beam) {
                double diff = 0.0;
                for (int k = 0; k <= h; ++k) diff = std::max(diff, std::fabs(vec[k] - other[k]));
                if (diff < 1e-9) dup = true;
            }
            if (!dup) beam.push_back(std::move(vec));
        }
        for (auto& vec : carry)
            if (static_cast<int>(beam.size()) < beam_width) beam.push_back(std::move(vec));
    }

    return best == kInf ? kInf : best + extra;
}

}  // namespace jrsp::sop
