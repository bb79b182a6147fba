#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "jrsp/pricing.hpp"
#include "jrsp/validation.hpp"

#include <cmath>
#include <deque>
#include <limits>

using namespace jrsp;
using pricing::DualValues;
using pricing::Label;
using pricing::LabelKind;
using pricing::RouteVariant;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// synthetic open label on a given instance; only the fields read by the
// dominance machinery are populated
Label open_label(const Instance& inst, double s, double Gamma, double D, double F, double lo,
                 double hi, double dual_sum = 0.0) {
    Label L;
    L.kind = LabelKind::Seamless;
    L.last = 1;
    L.w_vertex = 0;
    L.s = s;
    L.Gamma = Gamma;
    L.D = D;
    L.F_speed = F;
    L.dual_sum = dual_sum;
    L.S_v = convex1d::SpeedWindow::interval(lo, hi);
    L.load = 1.0;
    (void)inst;
    return L;
}

struct Case4Pair {
    Instance inst;
    Label L1, L2;
};

// random consistent Case-4 pairs built from real label extensions
std::vector<Case4Pair> sample_case4_pairs(int want, std::uint64_t seed) {
    testutil::Rng rng(seed);
    std::vector<Case4Pair> pairs;
    while (static_cast<int>(pairs.size()) < want) {
        GenerateParams gp;
        gp.n = static_cast<int>(rng.uniform_int(2, 4));
        gp.K = 2;
        gp.seed = rng.next();
        gp.family = rng.u01() < 0.5 ? InstanceFamily::Short : InstanceFamily::UkLike;
        Instance inst = generate_instance(gp);
        DualValues duals = DualValues::zero(inst);
        for (int i = 1; i <= inst.n; ++i) duals.mu[i] = rng.uniform(0.0, 50.0);
        auto labels =
            validation::collect_labels(inst, duals, RouteVariant::Elementary, 4, true);
        for (std::size_t a = 0; a < labels.size() && static_cast<int>(pairs.size()) < want; ++a) {
            for (std::size_t b = a + 1; b < labels.size(); ++b) {
                if (labels[a].last != labels[b].last) continue;
                const Label* L1 = &labels[a];
                const Label* L2 = &labels[b];
                if (L1->T(L1->S_v.hi) > L2->T(L2->S_v.hi)) std::swap(L1, L2);
                if (L1->T(L1->S_v.hi) > L2->T(L2->S_v.hi)) continue;
                if (L1->D <= 0.0 || L2->D <= 0.0) continue;
                pairs.push_back(Case4Pair{inst, *L1, *L2});
                break;
            }
        }
    }
    return pairs;
}

}  // namespace

TEST_CASE("init label carries the documented starting attributes") {
    Instance inst = testutil::line_instance(2, 100.0, 1000.0);
    Label L0 = pricing::init_label(inst);
    CHECK(L0.last == 0);
    CHECK(L0.w_vertex == 0);
    CHECK(L0.s == 0.0);
    CHECK(L0.M == 0);
    CHECK(L0.dual_sum == 0.0);
    CHECK(L0.load == 0.0);
    CHECK(L0.Gamma == 0.0);
    CHECK(L0.D == 0.0);
    CHECK(L0.F_speed == 0.0);
    CHECK(L0.S_v.lo == doctest::Approx(inst.speed_floor()));
    CHECK(L0.S_v.hi == doctest::Approx(20.0));
    // v_F > l clamps the lower end
    CHECK(L0.S_v.lo == doctest::Approx(0.1015 / 0.0072));
    Label L0b = pricing::init_label(inst);
    CHECK(L0.s == L0b.s);
    CHECK(L0.S_v.lo == L0b.S_v.lo);
}

TEST_CASE("extension emits three labels when the window admits them") {
    Instance inst = testutil::line_instance(2, 100.0, 1000.0);
    inst.vertex[1].a = 5.2;  // reachable range at admissible speeds is [5, 7.09]
    inst.vertex[1].b = 6.8;
    Label L0 = pricing::init_label(inst);
    DualValues duals = DualValues::zero(inst);
    auto labels = pricing::extend_label(inst, L0, 1, duals, RouteVariant::Elementary);
    REQUIRE(labels.size() == 3);
    const Label* la = nullptr;
    const Label* lb = nullptr;
    const Label* ls = nullptr;
    for (const auto& l : labels) {
        if (l.kind == LabelKind::ActiveA) la = &l;
        if (l.kind == LabelKind::ActiveB) lb = &l;
        if (l.kind == LabelKind::Seamless) ls = &l;
    }
    REQUIRE(la);
    REQUIRE(lb);
    REQUIRE(ls);
    // L1 travels at the cheapest speed that still reaches a_j in time:
    // the floor is below 100/5.2, so the deadline binds
    double v_exp = std::max(inst.speed_floor(), 100.0 / 5.2);
    CHECK(la->F_speed == doctest::Approx(100.0 * inst.cost.rate(v_exp)).epsilon(1e-9));
    CHECK(la->s == doctest::Approx(5.2));
    CHECK(la->D == 0.0);
    CHECK(la->S_v.lo == doctest::Approx(inst.speed_floor()));
    // L2 is forced to arrive exactly at b
    CHECK(lb->s == doctest::Approx(6.8));
    CHECK(lb->seg_speed == doctest::Approx(100.0 / 6.8).epsilon(1e-12));
    // L3 narrows the window to speeds hitting [a_j, b_j]
    CHECK(ls->D == doctest::Approx(100.0));
    CHECK(ls->S_v.lo == doctest::Approx(100.0 / 6.8).epsilon(1e-9));
    CHECK(ls->S_v.hi == doctest::Approx(100.0 / 5.2).epsilon(1e-9));
    CHECK(ls->M == (1ULL << 1));

    // a window above the reachable band leaves only the waiting label
    inst.vertex[1].a = 20.0;
    inst.vertex[1].b = 500.0;
    auto wait_only = pricing::extend_label(inst, L0, 1, duals, RouteVariant::Elementary);
    REQUIRE(wait_only.size() == 1);
    CHECK(wait_only.front().kind == LabelKind::ActiveA);
}

TEST_CASE("unreachable b_j suppresses the exact-arrival label") {
    Instance inst = testutil::line_instance(1, 100.0, 1000.0);
    inst.vertex[1].a = 0.0;
    inst.vertex[1].b = 4.0;  // needs v = 25 > u
    Label L0 = pricing::init_label(inst);
    auto labels =
        pricing::extend_label(inst, L0, 1, DualValues::zero(inst), RouteVariant::Elementary);
    for (const auto& l : labels) CHECK(l.kind != LabelKind::ActiveB);
}

TEST_CASE("degenerate window a_j == b_j") {
    Instance inst = testutil::line_instance(1, 100.0, 1000.0);
    inst.vertex[1].a = 6.0;
    inst.vertex[1].b = 6.0;
    Label L0 = pricing::init_label(inst);
    auto labels =
        pricing::extend_label(inst, L0, 1, DualValues::zero(inst), RouteVariant::Elementary);
    const Label* la = nullptr;
    const Label* lb = nullptr;
    for (const auto& l : labels) {
        if (l.kind == LabelKind::ActiveA) la = &l;
        if (l.kind == LabelKind::ActiveB) lb = &l;
        if (l.kind == LabelKind::Seamless) CHECK(l.S_v.singleton(1e-6));
    }
    REQUIRE(la);
    REQUIRE(lb);
    CHECK(la->s == lb->s);
    CHECK(la->F_speed == doctest::Approx(lb->F_speed).epsilon(1e-9));
}

TEST_CASE("variant rules shape the forbidden set") {
    Instance inst = testutil::line_instance(3, 50.0, 5000.0);
    Label L0 = pricing::init_label(inst);
    DualValues d = DualValues::zero(inst);
    auto el = pricing::extend_label(inst, L0, 1, d, RouteVariant::Elementary);
    auto two = pricing::extend_label(inst, el.front(), 2, d, RouteVariant::TwoCycleFree);
    auto q = pricing::extend_label(inst, el.front(), 2, d, RouteVariant::QRoute);
    REQUIRE(!two.empty());
    REQUIRE(!q.empty());
    CHECK(two.front().M == ((1ULL << 1) | (1ULL << 2)));
    CHECK(q.front().M == (1ULL << 2));
    auto elem2 = pricing::extend_label(inst, el.front(), 2, d, RouteVariant::Elementary);
    CHECK(elem2.front().M == ((1ULL << 1) | (1ULL << 2)));
}

TEST_CASE("termination matches the fixed-route optimum on its own pattern") {
    Instance inst = testutil::line_instance(1, 100.0, 100000.0);
    Label L0 = pricing::init_label(inst);
    DualValues duals = DualValues::zero(inst);
    duals.nu = 3.0;
    auto labels = pricing::extend_label(inst, L0, 1, duals, RouteVariant::Elementary);
    double best = kInf;
    for (const auto& l : labels) {
        auto col = pricing::terminate_label(inst, l, duals);
        if (!col) continue;
        // the reconstructed triple must re-price to the terminated cost
        auto ev = sop::pattern_cost(inst, col->route, col->pattern);
        REQUIRE(ev.feasible);
        CHECK(ev.cost == doctest::Approx(col->cost).epsilon(1e-9));
        CHECK(col->reduced_cost == doctest::Approx(col->cost - 3.0).epsilon(1e-9));
        best = std::min(best, col->cost);
    }
    auto opt = sop::optimal_route_cost(inst, sop::Route(std::vector<int>{0, 1, 0}));
    REQUIRE(opt.feasible);
    CHECK(best == doctest::Approx(opt.cost).epsilon(1e-9));
}

TEST_CASE("no termination past the planning horizon") {
    Instance inst = testutil::line_instance(1, 100.0, 9.0);  // needs 10 units at full speed
    Label L0 = pricing::init_label(inst);
    auto labels =
        pricing::extend_label(inst, L0, 1, DualValues::zero(inst), RouteVariant::Elementary);
    for (const auto& l : labels)
        CHECK(!pricing::terminate_label(inst, l, DualValues::zero(inst)).has_value());
}

TEST_CASE("terminated columns re-price to their own pattern cost") {
    testutil::Rng rng(2026);
    int checked = 0;
    for (int t = 0; t < 30; ++t) {
        GenerateParams gp;
        gp.n = static_cast<int>(rng.uniform_int(2, 5));
        gp.K = 2;
        gp.seed = rng.next();
        gp.family = t % 2 ? InstanceFamily::Deep : InstanceFamily::UkLike;
        Instance inst = generate_instance(gp);
        DualValues duals = DualValues::zero(inst);
        auto labels = validation::collect_labels(inst, duals, RouteVariant::Elementary, 3, false);
        // collect_labels flattens parents, so rebuild chains by re-extension
        std::deque<Label> arena;
        arena.push_back(pricing::init_label(inst));
        for (std::size_t head = 0; head < arena.size() && checked < 200; ++head) {
            if (arena[head].len >= 3) continue;
            for (int j = 1; j <= inst.n; ++j)
                for (Label& nl : pricing::extend_label(inst, arena[head], j, duals,
                                                       RouteVariant::Elementary))
                    arena.push_back(std::move(nl));
        }
        for (const auto& L : arena) {
            if (L.len == 0 || checked >= 200) continue;
            auto col = pricing::terminate_label(inst, L, duals);
            if (!col) continue;
            auto ev = sop::pattern_cost(inst, col->route, col->pattern);
            REQUIRE(ev.feasible);
            CHECK(col->cost ==
                  doctest::Approx(ev.cost).epsilon(1e-8));
            ++checked;
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("dominance Case 1 and anti-reflexivity") {
    Instance inst = testutil::line_instance(2, 100.0, 1000.0);
    Label A;
    A.kind = LabelKind::ActiveA;
    A.last = 1;
    A.w_vertex = 1;
    A.s = 10.0;
    A.Gamma = 0.0;
    A.D = 0.0;
    A.F_speed = 5.0;
    A.load = 1.0;
    A.S_v = convex1d::SpeedWindow::interval(inst.speed_floor(), 20.0);
    Label B = A;
    B.F_speed = 6.0;
    CHECK(pricing::dominates(inst, A, B));
    CHECK(!pricing::dominates(inst, B, A));
    CHECK(!pricing::dominates(inst, A, A));  // strict inequality
    B.s = 9.0;  // now B starts earlier; A no longer qualifies
    CHECK(!pricing::dominates(inst, A, B));
}

TEST_CASE("dominance respects the forbidden-set and load conditions") {
    Instance inst = testutil::line_instance(2, 100.0, 1000.0);
    Label A;
    A.kind = LabelKind::ActiveA;
    A.last = 1;
    A.s = 10.0;
    A.F_speed = 5.0;
    A.load = 2.0;
    A.M = (1ULL << 1) | (1ULL << 2);
    A.S_v = convex1d::SpeedWindow::interval(inst.speed_floor(), 20.0);
    Label B = A;
    B.F_speed = 7.0;
    B.M = 1ULL << 1;  // fewer forbidden vertices than A
    CHECK(!pricing::dominates(inst, A, B));
    B.M = A.M;
    B.load = 1.0;  // lighter than A
    CHECK(!pricing::dominates(inst, A, B));
    B.load = 2.5;
    CHECK(pricing::dominates(inst, A, B));
}

TEST_CASE("dominates agrees with the grid verifier on random Case-4 pairs") {
    auto pairs = sample_case4_pairs(120, 555);
    int positives = 0;
    for (auto& pr : pairs) {
        // give the pair comparable forbidden sets and loads so conditions
        // 2-3 hold and condition 4 is what gets exercised
        pr.L2.M |= pr.L1.M;
        pr.L2.load = std::max(pr.L1.load, pr.L2.load);
        bool fast = pricing::dominates(pr.inst, pr.L1, pr.L2);
        bool slow = validation::grid_condition4(pr.inst, pr.L1, pr.L2, 1e-3);
        if (fast) {
            // sound: every grid point must verify
            CHECK(slow);
            ++positives;
        } else {
            // completeness up to the tolerance margin: when the grid says
            // yes with slack, the exact rule must not say no
            double z = pricing::z_star(pr.inst, pr.L1, pr.L2);
            double gap = z - pr.L1.dual_sum + pr.L2.dual_sum;
            if (slow && gap < -1e-6 * (1.0 + std::fabs(z))) CHECK(fast);
        }
    }
    CHECK(positives > 0);
}

TEST_CASE("z_star: identical geometry with delta zero is the constant gap") {
    Instance inst = testutil::line_instance(1, 100.0, 1000.0);
    Label L1 = open_label(inst, 2.0, 1.0, 150.0, 10.0, 15.0, 19.0);
    Label L2 = open_label(inst, 2.0, 1.0, 150.0, 14.0, 15.0, 19.0);
    double z = pricing::z_star(inst, L1, L2);
    CHECK(z == doctest::Approx(10.0 - 14.0).epsilon(1e-9));
}

TEST_CASE("z_star: delta zero with D1 > D2 peaks at v2max") {
    Instance inst = testutil::line_instance(1, 100.0, 1000.0);
    // same s + Gamma, L1 covers more distance: the cost gap increases in v
    Label L1 = open_label(inst, 3.0, 0.0, 180.0, 2.0, 15.0, 20.0);
    Label L2 = open_label(inst, 3.0, 0.0, 150.0, 1.0, 15.0, 16.5);
    // precondition: T1(v1max) = 3 + 9 = 12 <= T2(v2max) = 3 + 150/16.5
    REQUIRE(L1.T(L1.S_v.hi) <= L2.T(L2.S_v.hi));
    double z = pricing::z_star(inst, L1, L2);
    double grid = validation::grid_psi_max(inst, L1, L2, 1e-5);
    CHECK(z == doctest::Approx(grid).epsilon(1e-7));
}

TEST_CASE("z_star matches grid maximization of psi on random pairs") {
    auto pairs = sample_case4_pairs(100, 777);
    for (const auto& pr : pairs) {
        double z = pricing::z_star(pr.inst, pr.L1, pr.L2);
        double grid = validation::grid_psi_max(pr.inst, pr.L1, pr.L2, 1e-4);
        CHECK(std::fabs(z - grid) <= 1e-6 * (1.0 + std::fabs(grid)));
    }
}

TEST_CASE("time matching map and cost gap behave as the case split needs") {
    auto pairs = sample_case4_pairs(60, 888);
    int stationarity_checked = 0;
    for (const auto& pr : pairs) {
        const Label& L1 = pr.L1;
        const Label& L2 = pr.L2;
        const double delta = (L2.s + L2.Gamma) - (L1.s + L1.Gamma);
        auto beta = [&](double v) { return L1.D / (L2.D / v + delta); };
        auto T1 = [&](double v) { return L1.T(v); };
        auto T2 = [&](double v) { return L2.T(v); };
        // beta is monotonically increasing on S_v2
        double prev = -1e300;
        for (int k = 0; k <= 20; ++k) {
            double v = L2.S_v.lo + (L2.S_v.hi - L2.S_v.lo) * k / 20.0;
            if (L2.D / v + delta <= 0.0) continue;
            double b = beta(v);
            CHECK(b >= prev - 1e-12);
            prev = b;
            // time matching wherever beta lands inside S_v1
            if (b >= L1.S_v.lo - 1e-9 && b <= L1.S_v.hi + 1e-9) {
                CHECK(T1(std::clamp(b, L1.S_v.lo, L1.S_v.hi)) ==
                      doctest::Approx(T2(v)).epsilon(1e-9));
            }
            // finish-time ordering is equivalent to the speed comparison
            for (int m = 0; m <= 4; ++m) {
                double v1 = L1.S_v.lo + (L1.S_v.hi - L1.S_v.lo) * m / 4.0;
                CHECK((T1(v1) <= T2(v) + 1e-9) == (b <= v1 + 1e-7 * (1.0 + v1)));
            }
        }
        // H has a stationary point at v* when it falls inside the window;
        // the stationarity check uses the raw time-matching speed, no clamping
        if (delta != 0.0) {
            double vstar = (L1.D - L2.D) / delta;
            double margin = 1e-4 * (1.0 + std::fabs(vstar));
            if (vstar > L2.S_v.lo + margin && vstar < L2.S_v.hi - margin &&
                L2.D / vstar + delta > 0.0) {
                auto H = [&](double v) {
                    return L1.C(beta(v), pr.inst.cost) - L2.C(v, pr.inst.cost);
                };
                double h = 1e-5 * (1.0 + std::fabs(vstar));
                double deriv = (H(vstar + h) - H(vstar - h)) / (2.0 * h);
                CHECK(std::fabs(deriv) <= 1e-5 * std::fabs(H(vstar)) + 1e-8);
                ++stationarity_checked;
            }
        }
    }
    (void)stationarity_checked;  // rare but exercised when geometry allows
}

TEST_CASE("T decreases and C is convex on sampled labels") {
    auto pairs = sample_case4_pairs(20, 999);
    for (const auto& pr : pairs) {
        for (const Label* L : {&pr.L1, &pr.L2}) {
            double lo = L->S_v.lo, hi = L->S_v.hi;
            if (hi - lo < 1e-6) continue;
            double prev_t = 1e300;
            for (int k = 0; k <= 10; ++k) {
                double v = lo + (hi - lo) * k / 10.0;
                double t = L->T(v);
                CHECK(t <= prev_t + 1e-12);
                prev_t = t;
            }
            double x = lo + (hi - lo) * 0.25;
            double y = lo + (hi - lo) * 0.75;
            CHECK(L->C(0.5 * (x + y), pr.inst.cost) <
                  0.5 * (L->C(x, pr.inst.cost) + L->C(y, pr.inst.cost)) + 1e-12);
        }
    }
}

TEST_CASE("pricing finds nothing when all duals vanish") {
    Instance inst = testutil::line_instance(3, 80.0, 5000.0);
    pricing::PricingLimits lim;
    auto res =
        pricing::solve_pricing(inst, DualValues::zero(inst), RouteVariant::Elementary, lim);
    CHECK(res.columns.empty());
    CHECK(res.exhaustive);
}

TEST_CASE("pricing equals exhaustive pattern enumeration on tiny instances") {
    testutil::Rng rng(31);
    for (int t = 0; t < 6; ++t) {
        GenerateParams gp;
        gp.n = static_cast<int>(rng.uniform_int(2, 4));
        gp.K = 2;
        gp.seed = rng.next();
        gp.family = t % 2 ? InstanceFamily::Short : InstanceFamily::UkLike;
        Instance inst = generate_instance(gp);
        // pin capacity so it bounds q-route walk length and the
        // enumeration below stays exhaustive
        for (int i = 1; i <= inst.n; ++i) inst.vertex[i].demand = 10.0;
        inst.Q = 35.0;
        DualValues duals = DualValues::zero(inst);
        double scale = 0.0;
        for (int i = 1; i <= inst.n; ++i)
            scale = std::max(scale,
                             (inst.d(0, i) + inst.d(i, 0)) * inst.cost.rate(inst.speed_hi));
        for (int i = 1; i <= inst.n; ++i) duals.mu[i] = rng.uniform(0.0, 1.2 * scale);
        duals.nu = rng.uniform(-0.1 * scale, 0.1 * scale);
        for (auto variant : {RouteVariant::Elementary, RouteVariant::TwoCycleFree,
                             RouteVariant::QRoute}) {
            pricing::PricingLimits lim;
            lim.max_columns = 3;
            auto res = pricing::solve_pricing(inst, duals, variant, lim);
            double oracle = validation::enumerate_pricing_best_rc(inst, duals, variant);
            if (res.columns.empty()) {
                CHECK(oracle >= -lim.eps_rc - 1e-9);
            } else {
                CHECK(res.columns.front().reduced_cost ==
                      doctest::Approx(oracle).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("dominance on/off yields identical most-negative reduced costs") {
    auto res = validation::dominance_onoff_suite(25, 5, 4242, 1e-6);
    CHECK(res.failures == 0);
    // with wage and load terms enabled the sound rule must still agree
    auto res2 = validation::dominance_onoff_suite(15, 4, 4243, 1e-6, true);
    CHECK(res2.failures == 0);
}

TEST_CASE("arc-level duals steer pricing and forbidden arcs exclude") {
    Instance inst = testutil::line_instance(3, 80.0, 8000.0);
    DualValues duals = DualValues::zero(inst);
    duals.arc_dual.assign(4, std::vector<double>(4, 0.0));
    duals.arc_dual[1][2] = 1e4;  // generous reward for traversing (1,2)
    pricing::PricingLimits lim;
    lim.max_columns = 5;
    auto res = pricing::solve_pricing(inst, duals, RouteVariant::Elementary, lim);
    REQUIRE(!res.columns.empty());
    bool uses = false;
    for (std::size_t k = 1; k < res.columns.front().route.seq.size(); ++k)
        if (res.columns.front().route.seq[k - 1] == 1 && res.columns.front().route.seq[k] == 2)
            uses = true;
    CHECK(uses);

    // forbidding the arc removes every such column
    std::vector<std::vector<char>> forbidden(4, std::vector<char>(4, 0));
    forbidden[1][2] = 1;
    auto res2 = pricing::solve_pricing(inst, duals, RouteVariant::Elementary, lim, &forbidden);
    for (const auto& col : res2.columns)
        for (std::size_t k = 1; k < col.route.seq.size(); ++k)
            CHECK(!(col.route.seq[k - 1] == 1 && col.route.seq[k] == 2));
}

TEST_CASE("bucket granularity does not change the result") {
    Instance inst = testutil::line_instance(4, 70.0, 9000.0);
    DualValues duals = DualValues::zero(inst);
    for (int i = 1; i <= 4; ++i) duals.mu[i] = 40.0 + 3.0 * i;
    pricing::PricingLimits a, b;
    a.bucket_granularity = 1.0;
    b.bucket_granularity = 10.0;
    auto ra = pricing::solve_pricing(inst, duals, RouteVariant::Elementary, a);
    auto rb = pricing::solve_pricing(inst, duals, RouteVariant::Elementary, b);
    REQUIRE(ra.columns.size() == rb.columns.size());
    if (!ra.columns.empty())
        CHECK(ra.columns.front().reduced_cost ==
              doctest::Approx(rb.columns.front().reduced_cost).epsilon(1e-12));
}
