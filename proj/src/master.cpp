#include "jrsp/master.hpp"

#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace jrsp::master {

// ---------------------------------------------------------------------------
// Column

Column Column::from_terminated(const Instance& inst, const pricing::TerminatedColumn& t) {
    Column c;
    c.route = t.route;
    c.pattern = t.pattern;
    c.profile = t.profile;
    c.cost = t.cost;
    c.alpha.assign(inst.n + 1, 0);
    std::vector<std::vector<int>> counts(inst.n + 1, std::vector<int>(inst.n + 1, 0));
    for (std::size_t k = 1; k + 1 < c.route.seq.size(); ++k) ++c.alpha[c.route.seq[k]];
    for (std::size_t k = 1; k < c.route.seq.size(); ++k)
        ++counts[c.route.seq[k - 1]][c.route.seq[k]];
    for (int i = 0; i <= inst.n; ++i)
        for (int j = 0; j <= inst.n; ++j)
            if (counts[i][j] > 0) c.arcs.push_back(ArcUse{i, j, counts[i][j]});
    return c;
}

bool Column::uses_arc(int i, int j) const {
    for (const auto& a : arcs)
        if (a.from == i && a.to == j) return true;
    return false;
}

bool Column::elementary() const {
    for (std::size_t i = 1; i < alpha.size(); ++i)
        if (alpha[i] > 1) return false;
    return true;
}

int Cut::coefficient(const Column& col) const {
    int c = 0;
    for (const auto& a : col.arcs)
        if (a.from >= 1 && contains(a.from) && !(a.to >= 1 && contains(a.to))) c += a.count;
    return c;
}

// ---------------------------------------------------------------------------
// RmpState

namespace {

// keyed by route only: two patterns of one route share every row
// coefficient, so the dearer one is LP-dominated and only breeds
// degeneracy
std::uint64_t column_key(const Column& c) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL;
        h *= 1099511628211ULL;
    };
    for (int v : c.route.seq) mix(static_cast<std::uint64_t>(v) + 1);
    return h;
}

}  // namespace

RmpState::RmpState(const Instance& inst) : inst_(&inst) {
    forbidden_.assign(inst.n + 1, std::vector<char>(inst.n + 1, 0));
    double max_d = 0.0;
    for (int i = 0; i <= inst.n; ++i)
        for (int j = 0; j <= inst.n; ++j)
            if (i != j) max_d = std::max(max_d, inst.d(i, j));
    double route_scale = max_d * (inst.n + 1);
    double cost_scale = inst.cost.rate(inst.speed_hi) * route_scale +
                        inst.cost.wage_rate * inst.vertex[0].b +
                        inst.cost.load_coeff * inst.Q * route_scale;
    penalty_ = 1e7 * std::max(1.0, cost_scale);
}

int RmpState::add_column(Column col) {
    std::uint64_t key = column_key(col);
    for (std::size_t i = 0; i < column_keys_.size(); ++i) {
        if (column_keys_[i] != key || pool_[i].route.seq != col.route.seq) continue;
        if (col.cost < pool_[i].cost - 1e-12) {
            // cheaper pattern for a known route replaces it in place
            bool was_active = active_[i] != 0;
            pool_[i] = std::move(col);
            active_[i] = was_active ? 1 : 0;
            return static_cast<int>(i);
        }
        return -1;
    }
    bool ok = true;
    for (const auto& d : decisions_)
        if (!d.required && col.uses_arc(d.from, d.to)) ok = false;
    pool_.push_back(std::move(col));
    column_keys_.push_back(key);
    active_.push_back(ok ? 1 : 0);
    return static_cast<int>(pool_.size()) - 1;
}

void RmpState::add_cut(const Cut& cut) { cuts_.push_back(cut); }

void RmpState::apply_branching(const BranchDecision& decision) {
    for (const auto& d : decisions_)
        if (d.from == decision.from && d.to == decision.to && d.required != decision.required)
            throw std::logic_error("contradictory branching decisions on one arc");
    decisions_.push_back(decision);
    refresh_activity();
}

void RmpState::reset_decisions(const std::vector<BranchDecision>& decisions) {
    for (std::size_t a = 0; a < decisions.size(); ++a)
        for (std::size_t b = a + 1; b < decisions.size(); ++b)
            if (decisions[a].from == decisions[b].from && decisions[a].to == decisions[b].to &&
                decisions[a].required != decisions[b].required)
                throw std::logic_error("contradictory branching decisions on one arc");
    decisions_ = decisions;
    refresh_activity();
}

void RmpState::refresh_activity() {
    const int n = inst_->n;
    forbidden_.assign(n + 1, std::vector<char>(n + 1, 0));
    for (const auto& d : decisions_)
        if (!d.required) forbidden_[d.from][d.to] = 1;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
        bool ok = true;
        for (const auto& a : pool_[i].arcs)
            if (forbidden_[a.from][a.to]) ok = false;
        active_[i] = ok ? 1 : 0;
    }
}

LpResult RmpState::solve_rmp_lp() {
    const Instance& inst = *inst_;
    const int n = inst.n;

    std::vector<int> required_rows;  // indices into decisions_
    for (std::size_t i = 0; i < decisions_.size(); ++i)
        if (decisions_[i].required) required_rows.push_back(static_cast<int>(i));

    const int m = n + 1 + static_cast<int>(cuts_.size()) + static_cast<int>(required_rows.size());
    lp::Problem p;
    p.penalty = penalty_;
    p.sense.assign(m, lp::RowSense::Ge);
    p.sense[n] = lp::RowSense::Eq;  // convexity row
    p.rhs.assign(m, 1.0);
    p.rhs[n] = static_cast<double>(inst.K);
    for (std::size_t c = 0; c < cuts_.size(); ++c) p.rhs[n + 1 + c] = cuts_[c].rhs;

    std::vector<int> pool_var(pool_.size(), -1);
    for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (!active_[i]) continue;
        const Column& col = pool_[i];
        lp::SparseCol sc;
        sc.cost = col.cost;
        for (int v = 1; v <= n; ++v)
            if (col.alpha[v] > 0) {
                sc.row.push_back(v - 1);
                sc.coef.push_back(static_cast<double>(col.alpha[v]));
            }
        sc.row.push_back(n);
        sc.coef.push_back(1.0);
        for (std::size_t c = 0; c < cuts_.size(); ++c) {
            int coef = cuts_[c].coefficient(col);
            if (coef > 0) {
                sc.row.push_back(n + 1 + static_cast<int>(c));
                sc.coef.push_back(static_cast<double>(coef));
            }
        }
        for (std::size_t r = 0; r < required_rows.size(); ++r) {
            const auto& d = decisions_[required_rows[r]];
            int cnt = 0;
            for (const auto& a : col.arcs)
                if (a.from == d.from && a.to == d.to) cnt += a.count;
            if (cnt > 0) {
                sc.row.push_back(n + 1 + static_cast<int>(cuts_.size()) + static_cast<int>(r));
                sc.coef.push_back(static_cast<double>(cnt));
            }
        }
        pool_var[i] = static_cast<int>(p.cols.size());
        p.cols.push_back(std::move(sc));
    }
    // idle-vehicle slack: the fleet row stays "= K" while unused vehicles
    // cost nothing
    int idle_var = static_cast<int>(p.cols.size());
    {
        lp::SparseCol sc;
        sc.cost = 0.0;
        sc.row.push_back(n);
        sc.coef.push_back(1.0);
        p.cols.push_back(std::move(sc));
    }

    lp::Result r = lp::solve(p);
    pivots_ += r.pivots;

    LpResult out;
    out.objective = r.objective;
    out.feasible = r.artificial_sum <= 1e-6 * std::max(1.0, static_cast<double>(inst.K));
    out.z.assign(pool_.size(), 0.0);
    for (std::size_t i = 0; i < pool_.size(); ++i)
        if (pool_var[i] >= 0) out.z[i] = r.x[pool_var[i]];
    out.idle = r.x[idle_var];

    out.duals.mu.assign(n + 1, 0.0);
    for (int v = 1; v <= n; ++v) out.duals.mu[v] = r.y[v - 1];
    out.duals.nu = r.y[n];
    out.duals.arc_dual.assign(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t c = 0; c < cuts_.size(); ++c) {
        double y = r.y[n + 1 + c];
        if (y == 0.0) continue;
        for (int i = 1; i <= n; ++i) {
            if (!cuts_[c].contains(i)) continue;
            for (int j = 0; j <= n; ++j)
                if (i != j && !(j >= 1 && cuts_[c].contains(j))) out.duals.arc_dual[i][j] += y;
        }
    }
    for (std::size_t rr = 0; rr < required_rows.size(); ++rr) {
        const auto& d = decisions_[required_rows[rr]];
        out.duals.arc_dual[d.from][d.to] += r.y[n + 1 + cuts_.size() + rr];
    }
    return out;
}

std::vector<std::vector<double>> RmpState::compute_arc_values(const std::vector<double>& z) const {
    const int n = inst_->n;
    std::vector<std::vector<double>> x(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (!active_[i] || z[i] <= 0.0) continue;
        for (const auto& a : pool_[i].arcs) x[a.from][a.to] += z[i] * a.count;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Rounded capacity inequalities

namespace {

struct SetEval {
    double crossing = 0.0;
    double xi = 0.0;
    double violation() const { return xi - crossing; }
};

SetEval evaluate_set(const Instance& inst, const std::vector<std::vector<double>>& x,
                     std::uint64_t mask) {
    SetEval e;
    double q = 0.0;
    for (int i = 1; i <= inst.n; ++i) {
        if (!((mask >> i) & 1ULL)) continue;
        q += inst.demand_of(i);
        for (int j = 0; j <= inst.n; ++j) {
            if (i == j) continue;
            if (j >= 1 && ((mask >> j) & 1ULL)) continue;
            e.crossing += x[i][j];
        }
    }
    e.xi = std::ceil(q / inst.Q - 1e-9);
    return e;
}

}  // namespace

std::vector<Cut> RmpState::separate_rci(const std::vector<std::vector<double>>& x) const {
    const Instance& inst = *inst_;
    const int n = inst.n;
    const double support_threshold = 0.1;
    const double min_violation = 0.01;

    // connected components of the thresholded support graph on customers
    std::vector<int> comp(n + 1, -1);
    int ncomp = 0;
    for (int s = 1; s <= n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = ncomp;
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            for (int j = 1; j <= n; ++j) {
                if (comp[j] >= 0 || i == j) continue;
                if (x[i][j] >= support_threshold || x[j][i] >= support_threshold) {
                    comp[j] = ncomp;
                    stack.push_back(j);
                }
            }
        }
        ++ncomp;
    }

    std::set<std::uint64_t> seen;
    for (const auto& c : cuts_) seen.insert(c.set_mask);
    std::vector<Cut> found;
    auto consider = [&](std::uint64_t mask) {
        // singleton sets are implied by the partitioning rows
        if (mask == 0 || __builtin_popcountll(mask) < 2 || seen.count(mask)) return;
        SetEval e = evaluate_set(inst, x, mask);
        if (e.violation() >= min_violation) {
            seen.insert(mask);
            found.push_back(Cut{mask, e.xi});
        }
    };

    for (int c = 0; c < ncomp; ++c) {
        std::uint64_t mask = 0;
        int members = 0;
        for (int i = 1; i <= n; ++i)
            if (comp[i] == c) {
                mask |= 1ULL << i;
                ++members;
            }
        if (members < 2) continue;  // no support structure to grow from
        consider(mask);

        // greedy growth by the vertex that most increases the violation
        std::uint64_t cur = mask;
        for (;;) {
            double base = evaluate_set(inst, x, cur).violation();
            int best = -1;
            double best_gain = 1e-9;
            for (int v = 1; v <= n; ++v) {
                if ((cur >> v) & 1ULL) continue;
                double gain = evaluate_set(inst, x, cur | (1ULL << v)).violation() - base;
                if (gain > best_gain) {
                    best_gain = gain;
                    best = v;
                }
            }
            if (best < 0) break;
            cur |= 1ULL << best;
            consider(cur);
        }
    }
    return found;
}

}  // namespace jrsp::master
