#include "jrsp/bcp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>

namespace jrsp::bcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGapTol = 1e-6;

using Clock = std::chrono::steady_clock;

struct Node {
    std::vector<master::BranchDecision> decisions;
    double bound = -kInf;
    int id = 0;
    int depth = 0;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id < b.id;
    }
};

struct CgOutcome {
    bool converged = false;   // exact pricing found nothing and no cut was added
    bool infeasible = false;  // artificials stay basic at convergence
    bool timed_out = false;
    double bound = -kInf;
    master::LpResult lp;
};

int trace_level() {
    const char* env = std::getenv("JRSP_LOG");
    if (!env) return 0;
    std::string v(env);
    if (v == "info") return 1;
    if (v == "trace") return 2;
    return 0;
}

class Solver {
  public:
    Solver(const Instance& inst, const BcpOptions& opt)
        : inst_(inst), opt_(opt), rmp_(inst), start_(Clock::now()), trace_(trace_level()) {}

    double elapsed() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }
    bool timed_out() const { return elapsed() >= opt_.time_limit; }

    void add_route_column(const sop::Route& r) {
        auto opt = sop::optimal_route_cost(inst_, r);
        if (!opt.feasible) return;
        pricing::TerminatedColumn t;
        t.route = r;
        t.pattern = opt.pattern;
        t.profile = opt.profile;
        t.cost = opt.cost;
        rmp_.add_column(master::Column::from_terminated(inst_, t));
    }

    void seed_columns() {
        for (int i = 1; i <= inst_.n; ++i)
            add_route_column(sop::Route(std::vector<int>{0, i, 0}));

        // best-insertion construction into at most K routes; a feasible
        // starting pool keeps the first duals off the artificial-penalty
        // scale, which otherwise drags the whole column-generation phase
        std::vector<std::vector<int>> routes(inst_.K, std::vector<int>{0, 0});
        std::vector<double> loads(inst_.K, 0.0);
        std::vector<double> costs(inst_.K, 0.0);
        std::vector<int> order;
        for (int i = 1; i <= inst_.n; ++i) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (inst_.vertex[a].b != inst_.vertex[b].b) return inst_.vertex[a].b < inst_.vertex[b].b;
            return a < b;
        });
        int placed = 0;
        for (int c : order) {
            int best_r = -1, best_p = -1;
            double best_delta = std::numeric_limits<double>::infinity();
            for (int r = 0; r < inst_.K; ++r) {
                if (loads[r] + inst_.demand_of(c) > inst_.Q + 1e-9) continue;
                for (std::size_t p = 1; p < routes[r].size(); ++p) {
                    std::vector<int> cand = routes[r];
                    cand.insert(cand.begin() + p, c);
                    auto ev = sop::optimal_route_cost(inst_, sop::Route(cand));
                    if (!ev.feasible) continue;
                    double delta = ev.cost - costs[r];
                    if (delta < best_delta) {
                        best_delta = delta;
                        best_r = r;
                        best_p = static_cast<int>(p);
                    }
                }
            }
            if (best_r < 0) continue;  // unplaceable; artificials cover it
            routes[best_r].insert(routes[best_r].begin() + best_p, c);
            loads[best_r] += inst_.demand_of(c);
            costs[best_r] += best_delta;
            ++placed;
        }
        for (const auto& r : routes)
            if (r.size() > 2) add_route_column(sop::Route(r));

        // a complete construction doubles as the starting incumbent
        if (placed == inst_.n) {
            double total = 0.0;
            std::vector<SolvedRoute> sol;
            bool ok = true;
            for (const auto& r : routes) {
                if (r.size() <= 2) continue;
                auto ev = sop::optimal_route_cost(inst_, sop::Route(r));
                if (!ev.feasible) {
                    ok = false;
                    break;
                }
                total += ev.cost;
                sol.push_back(SolvedRoute{r, ev.profile, ev.cost});
            }
            if (ok && total < bub_) {
                bub_ = total;
                incumbent_ = std::move(sol);
            }
        }
    }

    CgOutcome run_column_generation() {
        CgOutcome out;
        int cut_rounds = 0;
        for (;;) {
            auto t_lp = Clock::now();
            master::LpResult lp = rmp_.solve_rmp_lp();
            stats_.lp_seconds += std::chrono::duration<double>(Clock::now() - t_lp).count();
            ++stats_.cg_iterations;
            if (trace_ >= 2)
                std::fprintf(stderr, "[cg] it=%lld obj=%.4f feasible=%d pool=%zu t=%.1fs\n",
                             static_cast<long long>(stats_.cg_iterations), lp.objective,
                             static_cast<int>(lp.feasible), rmp_.pool().size(), elapsed());
            if (timed_out()) {
                out.timed_out = true;
                out.lp = std::move(lp);
                return out;
            }

            auto t_pr = Clock::now();
            pricing::PricingLimits lim;
            lim.max_columns = opt_.max_cols_per_iter;
            lim.heuristic_pass = true;
            auto pr = pricing::solve_pricing(inst_, lp.duals, opt_.variant, lim,
                                             &rmp_.forbidden_arcs());
            bool exact_pass = false;
            if (pr.columns.empty()) {
                lim.heuristic_pass = false;
                pr = pricing::solve_pricing(inst_, lp.duals, opt_.variant, lim,
                                            &rmp_.forbidden_arcs());
                exact_pass = true;
            }
            stats_.pricing_seconds += std::chrono::duration<double>(Clock::now() - t_pr).count();
            int added = 0;
            for (const auto& tc : pr.columns) {
                master::Column col = master::Column::from_terminated(inst_, tc);
                if (rmp_.add_column(std::move(col)) >= 0) ++added;
            }
            stats_.columns += added;
            if (added > 0) continue;
            if (!exact_pass) {
                // heuristic produced only duplicates; force the exact pass
                lim.heuristic_pass = false;
                pr = pricing::solve_pricing(inst_, lp.duals, opt_.variant, lim,
                                            &rmp_.forbidden_arcs());
                for (const auto& tc : pr.columns) {
                    master::Column col = master::Column::from_terminated(inst_, tc);
                    if (rmp_.add_column(std::move(col)) >= 0) ++added;
                }
                stats_.columns += added;
                if (added > 0) continue;
            }
            // LP optimal over the variant's column set at this node
            if (opt_.cuts_on && cut_rounds < opt_.max_cut_rounds_per_node && lp.feasible) {
                auto x = rmp_.compute_arc_values(lp.z);
                auto cuts = rmp_.separate_rci(x);
                if (!cuts.empty()) {
                    for (const auto& c : cuts) rmp_.add_cut(c);
                    stats_.cuts += static_cast<std::int64_t>(cuts.size());
                    ++cut_rounds;
                    continue;
                }
            }
            out.converged = true;
            out.infeasible = !lp.feasible;
            out.bound = lp.objective;
            out.lp = std::move(lp);
            return out;
        }
    }

    struct IntegralCheck {
        bool integral = false;
        bool exact_cover = false;
        bool all_elementary = false;
        std::vector<int> selected;  // pool indices with z rounded to >= 1
    };

    IntegralCheck check_integral(const master::LpResult& lp) {
        IntegralCheck c;
        const auto& pool = rmp_.pool();
        std::vector<int> mult;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            double z = lp.z[i];
            double r = std::round(z);
            if (std::fabs(z - r) > 1e-6) return c;
            if (r >= 1.0) {
                c.selected.push_back(static_cast<int>(i));
                mult.push_back(static_cast<int>(r));
            }
        }
        c.integral = true;
        std::vector<int> cover(inst_.n + 1, 0);
        c.all_elementary = true;
        for (std::size_t k = 0; k < c.selected.size(); ++k) {
            const auto& col = pool[c.selected[k]];
            if (!col.elementary() || mult[k] != 1) c.all_elementary = false;
            for (int v = 1; v <= inst_.n; ++v) cover[v] += mult[k] * col.alpha[v];
        }
        c.exact_cover = true;
        for (int v = 1; v <= inst_.n; ++v)
            if (cover[v] != 1) c.exact_cover = false;
        return c;
    }

    // Shortcut repair for integral solutions that double-cover or carry a
    // cycle: keep the first visit of each customer, revalidate through sop.
    void try_repair_incumbent(const IntegralCheck& c) {
        std::vector<char> seen(inst_.n + 1, 0);
        std::vector<sop::Route> routes;
        for (int idx : c.selected) {
            const auto& col = rmp_.pool()[idx];
            std::vector<int> seq{0};
            for (std::size_t k = 1; k + 1 < col.route.seq.size(); ++k) {
                int v = col.route.seq[k];
                if (!seen[v]) {
                    seen[v] = 1;
                    seq.push_back(v);
                }
            }
            seq.push_back(0);
            if (seq.size() >= 3) routes.emplace_back(std::move(seq));
        }
        for (int v = 1; v <= inst_.n; ++v)
            if (!seen[v]) return;
        if (static_cast<int>(routes.size()) > inst_.K) return;
        double total = 0.0;
        std::vector<SolvedRoute> sol;
        for (const auto& r : routes) {
            auto opt = sop::optimal_route_cost(inst_, r);
            if (!opt.feasible) return;
            total += opt.cost;
            sol.push_back(SolvedRoute{r.seq, opt.profile, opt.cost});
        }
        if (total < bub_ - kGapTol) {
            bub_ = total;
            incumbent_ = std::move(sol);
        }
    }

    void accept_incumbent(const IntegralCheck& c) {
        double total = 0.0;
        std::vector<SolvedRoute> sol;
        for (int idx : c.selected) {
            const auto& col = rmp_.pool()[idx];
            auto opt = sop::optimal_route_cost(inst_, col.route);
            if (!opt.feasible) return;  // revalidation failed; keep searching
            total += opt.cost;
            sol.push_back(SolvedRoute{col.route.seq, opt.profile, opt.cost});
        }
        if (total < bub_ - kGapTol) {
            bub_ = total;
            incumbent_ = std::move(sol);
        }
    }

    struct BranchArc {
        int from = -1, to = -1;
    };

    BranchArc pick_branch_arc(const master::LpResult& lp, const IntegralCheck& c) {
        auto x = rmp_.compute_arc_values(lp.z);
        std::set<std::pair<int, int>> decided;
        for (const auto& d : rmp_.decisions()) decided.insert({d.from, d.to});

        BranchArc best;
        double best_score = kInf;
        for (int i = 0; i <= inst_.n; ++i) {
            for (int j = 0; j <= inst_.n; ++j) {
                if (i == j || decided.count({i, j})) continue;
                double frac = x[i][j] - std::floor(x[i][j]);
                if (frac <= 1e-6 || frac >= 1.0 - 1e-6) continue;
                double score = std::fabs(x[i][j] - 0.5);
                bool better = score < best_score - 1e-12;
                if (!better && std::fabs(score - best_score) <= 1e-12 && best.from >= 0) {
                    double d_new = inst_.d(i, j), d_old = inst_.d(best.from, best.to);
                    if (d_new > d_old + 1e-12)
                        better = true;
                    else if (std::fabs(d_new - d_old) <= 1e-12 &&
                             std::make_pair(i, j) < std::make_pair(best.from, best.to))
                        better = true;
                }
                if (better) {
                    best = BranchArc{i, j};
                    best_score = score;
                }
            }
        }
        if (best.from >= 0) return best;

        // integral but rejected: branch on an arc of an offending column
        for (int idx : c.selected) {
            const auto& col = rmp_.pool()[idx];
            for (const auto& a : col.arcs)
                if (!decided.count({a.from, a.to})) return BranchArc{a.from, a.to};
        }
        return best;
    }

    Solution run() {
        Solution sol;
        seed_columns();

        std::vector<Node> open;
        open.push_back(Node{{}, -kInf, next_id_++, 0});
        std::vector<double> stuck_bounds;
        bool hit_time_limit = false;
        bool root_recorded = false;

        while (!open.empty()) {
            if (timed_out()) {
                hit_time_limit = true;
                break;
            }
            std::size_t pick = 0;
            if (opt_.node_selection == NodeSelection::BestBound) {
                for (std::size_t i = 1; i < open.size(); ++i)
                    if (NodeOrder{}(open[i], open[pick])) pick = i;
            } else {
                pick = open.size() - 1;
            }
            Node node = open[pick];
            open.erase(open.begin() + pick);
            ++stats_.nodes;

            if (node.bound >= bub_ - kGapTol) continue;

            rmp_.reset_decisions(node.decisions);
            CgOutcome cg = run_column_generation();
            if (cg.timed_out) {
                hit_time_limit = true;
                open.push_back(node);  // keep its entry bound for BLB
                break;
            }
            if (!root_recorded) {
                stats_.root_lp = cg.infeasible ? kInf : cg.bound;
                root_recorded = true;
            }
            if (cg.infeasible) continue;  // pruned by infeasibility
            node.bound = cg.bound;
            if (node.bound >= bub_ - kGapTol) continue;

            IntegralCheck ic = check_integral(cg.lp);
            if (ic.integral && ic.exact_cover && ic.all_elementary) {
                accept_incumbent(ic);
                continue;
            }
            if (ic.integral) try_repair_incumbent(ic);

            BranchArc arc = pick_branch_arc(cg.lp, ic);
            if (arc.from < 0) {
                // nothing left to branch on; keep the node's bound honestly open
                stuck_bounds.push_back(node.bound);
                continue;
            }
            for (bool required : {false, true}) {
                Node child;
                child.decisions = node.decisions;
                child.decisions.push_back(master::BranchDecision{arc.from, arc.to, required});
                child.bound = node.bound;
                child.id = next_id_++;
                child.depth = node.depth + 1;
                open.push_back(child);
            }
        }

        double blb = bub_;
        for (const auto& nd : open) blb = std::min(blb, nd.bound);
        for (double b : stuck_bounds) blb = std::min(blb, b);
        bool fully_explored = open.empty();

        sol.blb = blb;
        sol.bub = bub_;
        sol.routes = incumbent_;
        sol.revalidated = !incumbent_.empty();
        if (hit_time_limit) {
            sol.status = SolveStatus::TimeLimit;
        } else if (incumbent_.empty()) {
            sol.status = fully_explored && stuck_bounds.empty() ? SolveStatus::Infeasible
                                                                : SolveStatus::Feasible;
            if (sol.status == SolveStatus::Infeasible) {
                sol.blb = kInf;
                sol.bub = kInf;
            }
        } else if (fully_explored && (stuck_bounds.empty() || blb >= bub_ - kGapTol)) {
            sol.status = SolveStatus::Optimal;
            sol.blb = std::min(blb, bub_);
        } else {
            sol.status = SolveStatus::Feasible;
        }
        sol.stats = stats_;
        sol.stats.seconds = elapsed();
        return sol;
    }

    double root_bound() {
        seed_columns();
        rmp_.reset_decisions({});
        CgOutcome cg = run_column_generation();
        if (cg.infeasible) return kInf;
        return cg.bound;
    }

  private:
    const Instance& inst_;
    BcpOptions opt_;
    master::RmpState rmp_;
    Clock::time_point start_;
    Solution::Stats stats_;
    double bub_ = kInf;
    std::vector<SolvedRoute> incumbent_;
    int next_id_ = 0;
    int trace_ = 0;
};

}  // namespace

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::TimeLimit: return "time_limit";
    }
    return "unknown";
}

Solution solve_bcp(const Instance& inst, const BcpOptions& options) {
    inst.validate();
    Solver solver(inst, options);
    return solver.run();
}

double root_lower_bound(const Instance& inst, const BcpOptions& options) {
    inst.validate();
    Solver solver(inst, options);
    return solver.root_bound();
}

}  // namespace jrsp::bcp
