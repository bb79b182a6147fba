#include "jrsp/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace jrsp::pricing {

using convex1d::ArrivalKind;
using convex1d::SpeedWindow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_cost_over(const Instance& inst, const Label& L, double v_lo_extra = 0.0) {
    // min of C(v) over S_v (optionally floored), exploiting convexity
    if (L.D <= 0.0) return L.F_speed;
    double lo = std::max(L.S_v.lo, v_lo_extra);
    if (lo > L.S_v.hi + convex1d::kBoundaryEps) return kInf;
    double v = std::clamp(inst.cost.v_rate_min, lo, std::max(lo, L.S_v.hi));
    return L.F_speed + L.D * inst.cost.rate(v);
}

// cost-comparison margin; biased so borderline cases keep both labels
double dom_margin(double c1, double c2) {
    return 1e-9 * (1.0 + std::fabs(c1) + std::fabs(c2));
}

}  // namespace

DualValues DualValues::zero(const Instance& inst) {
    DualValues d;
    d.mu.assign(inst.n + 1, 0.0);
    return d;
}

Label init_label(const Instance& inst) {
    Label L;
    L.last = 0;
    L.w_vertex = 0;
    L.kind = LabelKind::Init;
    L.S_v = SpeedWindow::interval(inst.speed_floor(), inst.speed_hi);
    return L;
}

std::vector<Label> extend_label(const Instance& inst, const Label& L, int j,
                                const DualValues& duals, RouteVariant variant) {
    std::vector<Label> out;
    if (j < 1 || j > inst.n) return out;
    if (L.forbids(j)) return out;
    const double qj = inst.demand_of(j);
    if (L.load + qj > inst.Q + 1e-9) return out;

    const double dd = inst.d(L.last, j);
    const double D2 = L.D + dd;
    const Vertex& vj = inst.vertex[j];
    const double l_eff = inst.speed_floor();
    const double u = inst.speed_hi;

    std::uint64_t M2 = 0;
    switch (variant) {
        case RouteVariant::Elementary:
            M2 = L.M | (1ULL << j);
            break;
        case RouteVariant::QRoute:
            M2 = 1ULL << j;
            break;
        case RouteVariant::TwoCycleFree:
            M2 = (1ULL << L.last) | (1ULL << j);
            break;
    }

    Label base;
    base.parent = &L;
    base.last = j;
    base.len = L.len + 1;
    base.load = L.load + qj;
    base.dual_sum = L.dual_sum + duals.mu[j] + duals.arc(L.last, j);
    base.route_dist = L.route_dist + dd;
    base.M = M2;
    const double lc =
        inst.cost.load_coeff > 0.0 ? inst.cost.load_coeff * qj * base.route_dist : 0.0;

    auto push_active = [&](LabelKind kind, double start, double seg_cost, double seg_v) {
        Label x = base;
        x.kind = kind;
        x.w_vertex = j;
        x.s = start;
        x.S_v = SpeedWindow::interval(l_eff, u);
        x.Gamma = vj.service;
        x.D = 0.0;
        x.F_speed = L.F_speed + seg_cost + lc;
        x.seg_speed = seg_v;
        out.push_back(x);
    };

    if (D2 > 0.0) {
        auto r1 = convex1d::min_rate_cost(D2, inst.cost, L.S_v, ArrivalKind::AtMost, vj.a, L.s,
                                          L.Gamma);
        if (r1.feasible) push_active(LabelKind::ActiveA, vj.a, r1.value, r1.v);
        auto r2 = convex1d::min_rate_cost(D2, inst.cost, L.S_v, ArrivalKind::Exactly, vj.b, L.s,
                                          L.Gamma);
        if (r2.feasible) push_active(LabelKind::ActiveB, vj.b, r2.value, r2.v);
    } else {
        // zero-distance hop: arrival is the current ready time
        double ready = L.s + L.Gamma;
        if (ready <= vj.a + convex1d::kBoundaryEps)
            push_active(LabelKind::ActiveA, vj.a, 0.0, l_eff);
        if (std::fabs(ready - vj.b) <= convex1d::kBoundaryEps)
            push_active(LabelKind::ActiveB, vj.b, 0.0, l_eff);
    }

    SpeedWindow S3 = convex1d::intersect_time_window(L.S_v, D2, L.s + L.Gamma, vj.a, vj.b);
    if (!S3.empty()) {
        Label x = base;
        x.kind = LabelKind::Seamless;
        x.w_vertex = L.w_vertex;
        x.s = L.s;
        x.S_v = S3;
        x.Gamma = L.Gamma + vj.service;
        x.D = D2;
        x.F_speed = L.F_speed + lc;
        x.seg_speed = 0.0;
        out.push_back(x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Termination

namespace {

struct TerminalValue {
    double c_L = 0.0;
    double reduced_cost = 0.0;
    double final_speed = 0.0;
};

std::optional<TerminalValue> terminal_value(const Instance& inst, const Label& L,
                                            const DualValues& duals) {
    if (L.last == 0) return std::nullopt;
    const double wage = inst.cost.wage_rate;
    const double b0 = inst.vertex[0].b;
    const double D2 = L.D + inst.d(L.last, 0);
    TerminalValue tv;
    if (D2 > 0.0) {
        auto r = convex1d::min_rate_cost(D2, inst.cost, L.S_v, ArrivalKind::AtMost, b0, L.s,
                                         L.Gamma, wage);
        if (!r.feasible) return std::nullopt;
        tv.final_speed = r.v;
        tv.c_L = L.F_speed + D2 * inst.cost.rate(r.v);
        if (wage > 0.0) tv.c_L += wage * (L.s + L.Gamma + D2 / r.v);
    } else {
        if (L.s + L.Gamma > b0 + convex1d::kBoundaryEps) return std::nullopt;
        tv.final_speed = inst.speed_floor();
        tv.c_L = L.F_speed + wage * (L.s + L.Gamma);
    }
    tv.reduced_cost = tv.c_L - L.dual_sum - duals.arc(L.last, 0) - duals.nu;
    return tv;
}

}  // namespace

std::optional<TerminatedColumn> terminate_label(const Instance& inst, const Label& L,
                                                const DualValues& duals) {
    auto tv = terminal_value(inst, L, duals);
    if (!tv) return std::nullopt;

    // reconstruct the walk from the parent chain
    std::vector<const Label*> chain;
    for (const Label* p = &L; p != nullptr; p = p->parent) chain.push_back(p);
    std::reverse(chain.begin(), chain.end());
    const int h = static_cast<int>(chain.size()) - 1;

    TerminatedColumn col;
    col.cost = tv->c_L;
    col.reduced_cost = tv->reduced_cost;
    col.route.seq.resize(h + 2);
    col.route.seq[0] = 0;
    col.route.seq[h + 1] = 0;
    for (int p = 1; p <= h; ++p) col.route.seq[p] = chain[p]->last;

    // arcs after the last anchor run at the depot-return speed; each anchor's
    // committed speed covers every arc of its closed segment
    std::vector<double> seg(h + 2, tv->final_speed);
    for (int p = h; p >= 1; --p) {
        if (chain[p]->kind == LabelKind::Seamless) continue;
        col.pattern.active.push_back(p);
        col.pattern.at_b.push_back(chain[p]->kind == LabelKind::ActiveB);
        int q = p - 1;
        while (q >= 1 && chain[q]->kind == LabelKind::Seamless) --q;
        for (int k = q + 1; k <= p; ++k) seg[k] = chain[p]->seg_speed;
    }
    std::reverse(col.pattern.active.begin(), col.pattern.active.end());
    std::reverse(col.pattern.at_b.begin(), col.pattern.at_b.end());

    // schedule
    col.profile.speed.assign(h + 1, 0.0);
    col.profile.start.assign(h + 2, 0.0);
    col.profile.wait.assign(h + 2, 0.0);
    double t = 0.0;
    for (int p = 1; p <= h + 1; ++p) {
        double v = seg[p];
        col.profile.speed[p - 1] = v;
        double dd = inst.d(col.route.seq[p - 1], col.route.seq[p]);
        double arr = t + (dd > 0.0 && v > 0.0 ? dd / v : 0.0);
        double st = arr;
        if (p <= h) {
            if (chain[p]->kind == LabelKind::ActiveA) st = inst.vertex[col.route.seq[p]].a;
            if (chain[p]->kind == LabelKind::ActiveB) st = inst.vertex[col.route.seq[p]].b;
        }
        col.profile.start[p] = st;
        col.profile.wait[p] = std::max(0.0, st - arr);
        t = st + (p <= h ? inst.vertex[col.route.seq[p]].service : 0.0);
    }
    return col;
}

// ---------------------------------------------------------------------------
// Dominance

namespace {

// Case 4 guarded against degenerate zero-distance open segments.
bool condition4(const Instance& inst, const Label& L1, const Label& L2) {
    const CostFunction& cost = inst.cost;
    const bool fresh1 = L1.w_at_last();
    const bool fresh2 = L2.w_at_last();
    const double ds1 = L1.dual_sum, ds2 = L2.dual_sum;

    if (fresh1 && fresh2) {
        // Case 1: both have the last vertex active
        return L1.s <= L2.s &&
               L1.F_speed - ds1 < L2.F_speed - ds2 - dom_margin(L1.F_speed, L2.F_speed);
    }
    if (!fresh1 && fresh2) {
        // Case 2
        const double T2 = L2.s + L2.Gamma;
        if (L1.D <= 0.0) {
            double c1 = L1.F_speed;
            return L1.s + L1.Gamma <= T2 + convex1d::kBoundaryEps &&
                   c1 - ds1 < L2.F_speed - ds2 - dom_margin(c1, L2.F_speed);
        }
        if (L2.kind == LabelKind::ActiveB) {
            double c1 = min_cost_over(inst, L1);
            return c1 - ds1 < L2.F_speed - ds2 - dom_margin(c1, L2.F_speed);
        }
        // served at a_j: the matching speed is unique
        double budget = T2 - L1.s - L1.Gamma;
        if (budget <= 0.0) return false;
        double v1 = L1.D / budget;
        if (!L1.S_v.contains(v1)) return false;
        double c1 = L1.C(std::clamp(v1, L1.S_v.lo, L1.S_v.hi), cost);
        return c1 - ds1 < L2.F_speed - ds2 - dom_margin(c1, L2.F_speed);
    }
    if (fresh1 && !fresh2) {
        // Case 3
        const double T1 = L1.s + L1.Gamma;
        if (L1.kind == LabelKind::ActiveB) {
            // every v2 must finish exactly at b_j + tau_j: S_v2 singleton
            if (!L2.S_v.singleton()) return false;
            double t2 = L2.T(L2.S_v.lo);
            if (std::fabs(t2 - T1) > convex1d::kBoundaryEps * (1.0 + std::fabs(T1))) return false;
            double c2 = L2.C(L2.S_v.lo, cost);
            return L1.F_speed - ds1 < c2 - ds2 - dom_margin(L1.F_speed, c2);
        }
        // served at a_j: T1 is the smallest possible finish time at j
        if (T1 > L2.T(L2.S_v.hi) + convex1d::kBoundaryEps * (1.0 + std::fabs(T1))) return false;
        double c2 = min_cost_over(inst, L2);
        return L1.F_speed - ds1 < c2 - ds2 - dom_margin(L1.F_speed, c2);
    }

    // Case 4: both open
    if (L1.D <= 0.0) {
        double T1 = L1.s + L1.Gamma;
        if (T1 > L2.T(L2.S_v.hi)) return false;
        double c2 = min_cost_over(inst, L2);
        return L1.F_speed - ds1 < c2 - ds2 - dom_margin(L1.F_speed, c2);
    }
    if (L2.D <= 0.0) {
        double T2 = L2.s + L2.Gamma;
        double budget = T2 - L1.s - L1.Gamma;
        if (budget <= 0.0) return false;
        double v_need = L1.D / budget;
        double c1 = min_cost_over(inst, L1, v_need);
        if (c1 == kInf) return false;
        return c1 - ds1 < L2.F_speed - ds2 - dom_margin(c1, L2.F_speed);
    }
    if (L1.T(L1.S_v.hi) > L2.T(L2.S_v.hi)) return false;  // fastest finishes decide
    double z = z_star(inst, L1, L2);
    return z - ds1 + ds2 < -dom_margin(z, 0.0);
}

}  // namespace

bool dominates(const Instance& inst, const Label& L1, const Label& L2) {
    if (&L1 == &L2) return false;
    if (L1.last != L2.last) return false;                       // condition 1
    if ((L1.M & ~L2.M) != 0) return false;                      // condition 2: M1 subset of M2
    if (L2.load < L1.load - 1e-12) return false;                // condition 3
    if (inst.cost.load_coeff > 0.0 && L1.route_dist > L2.route_dist + 1e-12)
        return false;  // future carried-load charges scale with route distance
    return condition4(inst, L1, L2);
}

double z_star(const Instance& inst, const Label& L1, const Label& L2) {
    if (L1.w_at_last() || L2.w_at_last())
        throw std::logic_error("z_star requires both labels open (Case 4)");
    if (!(L1.D > 0.0) || !(L2.D > 0.0))
        throw std::logic_error("z_star requires positive open-segment distances");
    const double v1min = L1.S_v.lo, v1max = L1.S_v.hi;
    const double v2min = L2.S_v.lo, v2max = L2.S_v.hi;
    const CostFunction& cost = inst.cost;

    auto T1 = [&](double v) { return L1.T(v); };
    auto T2 = [&](double v) { return L2.T(v); };
    auto C1 = [&](double v) { return L1.C(v, cost); };
    auto C2 = [&](double v) { return L2.C(v, cost); };

    if (T1(v1max) > T2(v2max) + convex1d::kBoundaryEps * (1.0 + std::fabs(T2(v2max))))
        throw std::logic_error("z_star requires T1(v1max) <= T2(v2max)");

    if (T1(v1min) <= T2(v2max)) return C1(v1min) - C2(v2min);

    const double delta = (L2.s + L2.Gamma) - (L1.s + L1.Gamma);
    auto beta = [&](double v) { return L1.D / (L2.D / v + delta); };
    auto H = [&](double v) {
        double bv = std::clamp(beta(v), v1min, v1max);  // rounding guard
        return C1(bv) - C2(v);
    };

    const bool vstar_defined = delta != 0.0;
    const double vstar = vstar_defined ? (L1.D - L2.D) / delta : 0.0;

    if (T1(v1min) <= T2(v2min)) {
        // T2(v2max) < T1(v1min) <= T2(v2min)
        double z = std::max(C1(v1min) - C2(v2min), H(v2max));
        double den = L1.D - delta * v1min;
        if (vstar_defined && den > 0.0) {
            double vtilde = L2.D * v1min / den;
            if (vstar >= vtilde && vstar <= v2max) z = std::max(z, H(vstar));
        }
        return z;
    }
    // T2(v2min) < T1(v1min)
    double z = std::max(H(v2min), H(v2max));
    if (vstar_defined && vstar >= v2min && vstar <= v2max) z = std::max(z, H(vstar));
    return z;
}

// ---------------------------------------------------------------------------
// Label-setting

PricingResult solve_pricing(const Instance& inst, const DualValues& duals, RouteVariant variant,
                            const PricingLimits& limits,
                            const std::vector<std::vector<char>>* forbidden_arcs) {
    PricingResult result;
    const int n = inst.n;

    auto arc_ok = [&](int i, int j) {
        return forbidden_arcs == nullptr || !(*forbidden_arcs)[i][j];
    };

    // walks are naturally bounded by capacity or time; the one pathological
    // combination (zero-distance arc into a zero-demand, zero-service
    // customer) gets a hard cap
    int len_cap = 1 << 20;
    if (variant != RouteVariant::Elementary) {
        bool risky = false;
        for (int i = 0; i <= n && !risky; ++i)
            for (int j = 1; j <= n && !risky; ++j)
                if (i != j && inst.d(i, j) <= 0.0 && inst.demand_of(j) <= 0.0 &&
                    inst.vertex[j].service <= 0.0)
                    risky = true;
        if (risky) len_cap = 2 * n + 4;
    }

    std::deque<Label> arena;
    std::vector<char> dead;
    std::vector<char> processed;
    // kept labels bucketed by (last vertex, load band); only lighter-or-equal
    // bands can dominate, only heavier-or-equal bands can be dominated
    const double gran = limits.bucket_granularity > 0.0 ? limits.bucket_granularity : 1.0;
    std::vector<std::map<long long, std::vector<int>>> bucket(n + 1);
    auto band_of = [&](double load) {
        return static_cast<long long>(std::floor(load / gran + 1e-12));
    };

    struct Key {
        double load;
        int len;
        int last;
        int idx;
        bool operator>(const Key& o) const {
            if (load != o.load) return load > o.load;
            if (len != o.len) return len > o.len;
            if (last != o.last) return last > o.last;
            return idx > o.idx;
        }
    };
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> frontier;

    auto insert_label = [&](Label&& lab) {
        if (limits.use_dominance && lab.last >= 1) {
            auto& m = bucket[lab.last];
            const long long band = band_of(lab.load);
            for (auto it = m.begin(); it != m.end() && it->first <= band; ++it) {
                for (int idx : it->second) {
                    if (dead[idx]) continue;
                    if (dominates(inst, arena[idx], lab)) return;  // discard the newcomer
                }
            }
            for (auto it = m.lower_bound(band); it != m.end(); ++it) {
                for (int idx : it->second) {
                    if (dead[idx] || processed[idx]) continue;
                    if (dominates(inst, lab, arena[idx])) dead[idx] = 1;
                }
            }
        }
        arena.push_back(std::move(lab));
        int idx = static_cast<int>(arena.size()) - 1;
        dead.push_back(0);
        processed.push_back(0);
        if (arena[idx].last >= 1) bucket[arena[idx].last][band_of(arena[idx].load)].push_back(idx);
        frontier.push(Key{arena[idx].load, arena[idx].len, arena[idx].last, idx});
        ++result.labels_created;
    };

    insert_label(init_label(inst));

    struct Candidate {
        double rc;
        int idx;
    };
    std::vector<Candidate> candidates;
    const int exit_after = limits.heuristic_exit_after > 0 ? limits.heuristic_exit_after
                                                           : 4 * std::max(1, limits.max_columns);
    int found_heuristic = 0;
    bool early_exit = false;

    while (!frontier.empty()) {
        Key k = frontier.top();
        frontier.pop();
        if (dead[k.idx]) continue;
        processed[k.idx] = 1;
        const Label& L = arena[k.idx];

        if (L.last >= 1 && arc_ok(L.last, 0)) {
            auto tv = terminal_value(inst, L, duals);
            if (tv && tv->reduced_cost < -limits.eps_rc) {
                candidates.push_back(Candidate{tv->reduced_cost, k.idx});
                if (limits.heuristic_pass && tv->reduced_cost < -limits.heuristic_eps) {
                    if (++found_heuristic >= exit_after) {
                        early_exit = true;
                        break;
                    }
                }
            }
        }

        if (L.len >= len_cap) continue;
        for (int j = 1; j <= n; ++j) {
            if (!arc_ok(L.last, j)) continue;
            if (L.forbids(j)) continue;
            for (Label& nl : extend_label(inst, L, j, duals, variant)) insert_label(std::move(nl));
        }
    }

    for (char d : dead)
        if (d) ++result.labels_dominated;

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.rc < b.rc; });
    int keep = std::min<int>(limits.max_columns, static_cast<int>(candidates.size()));
    for (int i = 0; i < keep; ++i) {
        auto col = terminate_label(inst, arena[candidates[i].idx], duals);
        if (col) result.columns.push_back(std::move(*col));
    }
    result.exhaustive = !early_exit;
    return result;
}

}  // namespace jrsp::pricing
