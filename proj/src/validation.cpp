#include "jrsp/validation.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace jrsp::validation {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Global partition oracle

double best_partition_cost(const Instance& inst) {
    const int n = inst.n;
    if (n > 8) throw std::logic_error("partition oracle is limited to n <= 8");
    const int full = (1 << n) - 1;

    // best single-route cost per customer subset, over all orderings
    std::vector<double> route_cost(full + 1, kInf);
    std::vector<int> members;
    for (int mask = 1; mask <= full; ++mask) {
        members.clear();
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) members.push_back(i + 1);
        std::sort(members.begin(), members.end());
        double best = kInf;
        do {
            std::vector<int> seq;
            seq.push_back(0);
            seq.insert(seq.end(), members.begin(), members.end());
            seq.push_back(0);
            auto r = sop::optimal_route_cost(inst, sop::Route(std::move(seq)));
            if (r.feasible) best = std::min(best, r.cost);
        } while (std::next_permutation(members.begin(), members.end()));
        route_cost[mask] = best;
    }

    // partition DP over subsets with at most K blocks
    std::vector<std::vector<double>> dp(inst.K + 1, std::vector<double>(full + 1, kInf));
    dp[0][0] = 0.0;
    for (int k = 1; k <= inst.K; ++k) {
        dp[k] = dp[k - 1];
        for (int mask = 1; mask <= full; ++mask) {
            // iterate nonempty submasks containing the lowest set bit to
            // avoid symmetric double counting
            int low = mask & (-mask);
            for (int sub = mask; sub; sub = (sub - 1) & mask) {
                if (!(sub & low)) continue;
                if (route_cost[sub] == kInf) continue;
                double rest = dp[k - 1][mask ^ sub];
                if (rest == kInf) continue;
                dp[k][mask] = std::min(dp[k][mask], rest + route_cost[sub]);
            }
        }
    }
    return dp[inst.K][full];
}

// ---------------------------------------------------------------------------
// Exhaustive pricing oracle

namespace {

void enumerate_walks(const Instance& inst, pricing::RouteVariant variant, std::vector<int>& walk,
                     std::uint64_t M, double load, int max_len,
                     const std::function<void(const std::vector<int>&)>& emit) {
    if (static_cast<int>(walk.size()) >= 1) emit(walk);
    if (static_cast<int>(walk.size()) > max_len) return;
    int last = walk.empty() ? 0 : walk.back();
    for (int j = 1; j <= inst.n; ++j) {
        if ((M >> j) & 1ULL) continue;
        if (load + inst.demand_of(j) > inst.Q + 1e-9) continue;
        std::uint64_t M2 = 0;
        switch (variant) {
            case pricing::RouteVariant::Elementary:
                M2 = M | (1ULL << j);
                break;
            case pricing::RouteVariant::QRoute:
                M2 = 1ULL << j;
                break;
            case pricing::RouteVariant::TwoCycleFree:
                M2 = (1ULL << last) | (1ULL << j);
                break;
        }
        walk.push_back(j);
        enumerate_walks(inst, variant, walk, M2, load + inst.demand_of(j), max_len, emit);
        walk.pop_back();
    }
}

}  // namespace

double enumerate_pricing_best_rc(const Instance& inst, const pricing::DualValues& duals,
                                 pricing::RouteVariant variant) {
    if (inst.n > 4) throw std::logic_error("pricing enumeration is limited to n <= 4");
    const int max_len = 2 * inst.n + 2;
    if (variant != pricing::RouteVariant::Elementary) {
        // capacity must bound walk length, or the enumeration is not exhaustive
        double min_q = kInf;
        for (int i = 1; i <= inst.n; ++i) min_q = std::min(min_q, inst.demand_of(i));
        if (!(min_q > 0.0) || std::floor(inst.Q / min_q) > max_len)
            throw std::logic_error("pricing enumeration needs Q/min_demand <= 2n+2");
    }
    double best = kInf;

    std::vector<int> walk;
    std::function<void(const std::vector<int>&)> handle = [&](const std::vector<int>& customers) {
        if (customers.empty()) return;
        const int h = static_cast<int>(customers.size());
        sop::Route route;
        route.seq.push_back(0);
        route.seq.insert(route.seq.end(), customers.begin(), customers.end());
        route.seq.push_back(0);
        double mu_sum = 0.0;
        for (int v : customers) mu_sum += duals.mu[v];
        double arc_sum = 0.0;
        for (std::size_t k = 1; k < route.seq.size(); ++k)
            arc_sum += duals.arc(route.seq[k - 1], route.seq[k]);
        // all active-index subsets of 1..h+1 with all a/b sign choices
        for (int imask = 0; imask < (1 << (h + 1)); ++imask) {
            int bits = __builtin_popcount(static_cast<unsigned>(imask));
            for (int smask = 0; smask < (1 << bits); ++smask) {
                sop::Pattern pat;
                int b = 0;
                for (int p = 1; p <= h + 1; ++p)
                    if (imask & (1 << (p - 1))) {
                        pat.active.push_back(p);
                        pat.at_b.push_back((smask >> b) & 1);
                        ++b;
                    }
                auto ev = sop::pattern_cost(inst, route, pat);
                if (!ev.feasible) continue;
                double rc = ev.cost - mu_sum - arc_sum - duals.nu;
                best = std::min(best, rc);
            }
        }
    };
    enumerate_walks(inst, variant, walk, 0, 0.0, max_len, handle);
    return best;
}

// ---------------------------------------------------------------------------
// Label material

std::vector<pricing::Label> collect_labels(const Instance& inst, const pricing::DualValues& duals,
                                           pricing::RouteVariant variant, int max_len,
                                           bool open_only) {
    std::deque<pricing::Label> arena;
    arena.push_back(pricing::init_label(inst));
    std::vector<pricing::Label> out;
    for (std::size_t head = 0; head < arena.size(); ++head) {
        // deque indexing stays valid under push_back
        if (arena[head].len >= max_len) continue;
        for (int j = 1; j <= inst.n; ++j) {
            for (pricing::Label& nl : pricing::extend_label(inst, arena[head], j, duals, variant))
                arena.push_back(std::move(nl));
        }
    }
    for (const auto& L : arena) {
        if (L.len == 0) continue;
        if (open_only && L.w_at_last()) continue;
        pricing::Label flat = L;
        flat.parent = nullptr;
        out.push_back(flat);
    }
    return out;
}

double grid_psi_max(const Instance& inst, const pricing::Label& L1, const pricing::Label& L2,
                    double step) {
    const double v1min = L1.S_v.lo, v1max = L1.S_v.hi;
    const double v2min = L2.S_v.lo, v2max = L2.S_v.hi;
    double best = -kInf;
    const double delta = (L2.s + L2.Gamma) - (L1.s + L1.Gamma);
    for (double v = v2min;; v += step) {
        bool last = v >= v2max;
        double v2 = last ? v2max : v;
        double budget = L2.D / v2 + delta;  // T2(v2) - s1 - Gamma1
        if (budget > 0.0) {
            double beta = L1.D / budget;
            if (beta <= v1max + 1e-12) {
                double v1 = std::clamp(std::max(beta, v1min), v1min, v1max);
                best = std::max(best, L1.C(v1, inst.cost) - L2.C(v2, inst.cost));
            }
        }
        if (last) break;
    }
    return best;
}

bool grid_condition4(const Instance& inst, const pricing::Label& L1, const pricing::Label& L2,
                     double step) {
    const double v1min = L1.S_v.lo, v1max = L1.S_v.hi;
    const double v2min = L2.S_v.lo, v2max = L2.S_v.hi;
    for (double v = v2min;; v += step) {
        bool last = v >= v2max;
        double v2 = last ? v2max : v;
        double t2 = L2.T(v2);
        double budget = t2 - L1.s - L1.Gamma;
        bool found = false;
        if (budget > 0.0 || L1.D <= 0.0) {
            double lo = v1min;
            if (L1.D > 0.0) lo = std::max(lo, L1.D / budget);
            if (lo <= v1max + 1e-12) {
                double v1 = std::clamp(std::max(lo, inst.cost.v_rate_min), lo, v1max);
                v1 = std::clamp(v1, v1min, v1max);
                if (v1 < lo) v1 = lo;
                double c1 = L1.C(v1, inst.cost);
                if (c1 - L1.dual_sum < L2.C(v2, inst.cost) - L2.dual_sum) found = true;
            }
        }
        if (!found) return false;
        if (last) break;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Randomized suites

namespace {

GenerateParams suite_params(detail::Rng& rng, int n_max, int k_max) {
    GenerateParams gp;
    gp.n = static_cast<int>(rng.uniform_int(1, n_max));
    gp.K = static_cast<int>(rng.uniform_int(1, k_max));
    int fam = static_cast<int>(rng.uniform_int(0, 2));
    gp.family = fam == 0   ? InstanceFamily::Deep
                : fam == 1 ? InstanceFamily::Short
                           : InstanceFamily::UkLike;
    gp.seed = rng.next_u64();
    return gp;
}

sop::Route random_route(detail::Rng& rng, const Instance& inst, int h_max) {
    int h = static_cast<int>(rng.uniform_int(1, std::min(h_max, inst.n)));
    std::vector<int> pool(inst.n);
    for (int i = 0; i < inst.n; ++i) pool[i] = i + 1;
    for (int i = inst.n - 1; i > 0; --i)
        std::swap(pool[i], pool[rng.uniform_int(0, i)]);
    std::vector<int> seq{0};
    for (int i = 0; i < h; ++i) seq.push_back(pool[i]);
    seq.push_back(0);
    return sop::Route(std::move(seq));
}

}  // namespace

SuiteResult sop_agreement_suite(int trials, int h_max, std::uint64_t seed, double rel_tol,
                                std::vector<ProfileSample>* profiles) {
    SuiteResult res;
    detail::Rng rng(seed);
    int done = 0;
    while (done < trials) {
        GenerateParams gp = suite_params(rng, std::max(2, h_max), 3);
        gp.n = std::max(gp.n, 2);
        Instance inst = generate_instance(gp);
        sop::Route route = random_route(rng, inst, h_max);
        auto opt = sop::optimal_route_cost(inst, route);
        double oracle = sop::brute_force_oracle(inst, route, sop::OracleParams{});
        ++done;
        ++res.trials;
        if (!opt.feasible && oracle == kInf) continue;
        if (opt.feasible != (oracle < kInf)) {
            ++res.failures;
            continue;
        }
        double gap = std::fabs(opt.cost - oracle) / std::max(1.0, std::fabs(oracle));
        res.worst_gap = std::max(res.worst_gap, gap);
        if (gap > rel_tol) ++res.failures;
        if (profiles && opt.feasible)
            profiles->push_back(ProfileSample{inst, route, opt.profile});
    }
    return res;
}

SuiteResult bcp_oracle_suite(int trials, int n_max, int k_max, std::uint64_t seed, double abs_tol,
                             std::vector<ProfileSample>* profiles,
                             std::vector<bcp::Solution>* solutions) {
    SuiteResult res;
    detail::Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        GenerateParams gp = suite_params(rng, n_max, k_max);
        Instance inst = generate_instance(gp);
        bcp::BcpOptions opt;
        opt.variant = pricing::RouteVariant::Elementary;
        opt.time_limit = 120.0;
        bcp::Solution sol = bcp::solve_bcp(inst, opt);
        double oracle = best_partition_cost(inst);
        ++res.trials;
        bool solver_finite = sol.status == bcp::SolveStatus::Optimal;
        if (oracle == kInf) {
            if (solver_finite) ++res.failures;
            continue;
        }
        if (!solver_finite) {
            ++res.failures;
            continue;
        }
        double gap = std::fabs(sol.bub - oracle);
        res.worst_gap = std::max(res.worst_gap, gap);
        if (gap > abs_tol) ++res.failures;
        if (profiles)
            for (const auto& r : sol.routes)
                profiles->push_back(ProfileSample{inst, sop::Route(r.seq), r.profile});
        if (solutions) solutions->push_back(sol);
    }
    return res;
}

SuiteResult dominance_onoff_suite(int trials, int n_max, std::uint64_t seed, double tol,
                                  bool with_wage) {
    SuiteResult res;
    detail::Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        GenerateParams gp = suite_params(rng, n_max, 2);
        Instance inst = generate_instance(gp);
        if (with_wage) {
            inst.cost.wage_rate = 0.05 * inst.cost.rate(inst.speed_hi);
            inst.cost.load_coeff = 1e-4 * inst.cost.rate(inst.speed_hi);
        }
        pricing::DualValues duals = pricing::DualValues::zero(inst);
        // duals on the scale of single-customer route costs
        double scale = 0.0;
        for (int i = 1; i <= inst.n; ++i)
            scale = std::max(scale, (inst.d(0, i) + inst.d(i, 0)) * inst.cost.rate(inst.speed_hi));
        for (int i = 1; i <= inst.n; ++i) duals.mu[i] = rng.uniform(0.0, 1.5 * scale);
        duals.nu = rng.uniform(-0.2 * scale, 0.2 * scale);
        int variant_pick = static_cast<int>(rng.uniform_int(0, 2));
        auto variant = variant_pick == 0   ? pricing::RouteVariant::Elementary
                       : variant_pick == 1 ? pricing::RouteVariant::TwoCycleFree
                                           : pricing::RouteVariant::QRoute;

        pricing::PricingLimits lim;
        lim.max_columns = 5;
        auto on = pricing::solve_pricing(inst, duals, variant, lim);
        lim.use_dominance = false;
        auto off = pricing::solve_pricing(inst, duals, variant, lim);
        ++res.trials;
        double rc_on = on.columns.empty() ? 0.0 : on.columns.front().reduced_cost;
        double rc_off = off.columns.empty() ? 0.0 : off.columns.front().reduced_cost;
        double gap = std::fabs(rc_on - rc_off);
        res.worst_gap = std::max(res.worst_gap, gap);
        if (on.columns.empty() != off.columns.empty() || gap > tol) ++res.failures;
    }
    return res;
}

int count_structure_violations(const std::vector<ProfileSample>& profiles, double tol) {
    int violations = 0;
    for (const auto& ps : profiles) {
        const auto& seq = ps.route.seq;
        for (std::size_t p = 1; p + 1 < seq.size(); ++p) {
            const Vertex& v = ps.instance.vertex[seq[p]];
            double st = ps.profile.start[p];
            if (st > v.a + 1e-7 && st < v.b - 1e-7) {
                if (std::fabs(ps.profile.speed[p - 1] - ps.profile.speed[p]) > tol) ++violations;
            }
        }
    }
    return violations;
}

}  // namespace jrsp::validation
