#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "jrsp/convex1d.hpp"

#include <cmath>

using namespace jrsp;
using namespace jrsp::convex1d;

namespace {
const CostFunction kMaritime = CostFunction::maritime();
}

TEST_CASE("free arrival settles at the clamped rate minimizer") {
    SpeedWindow S = SpeedWindow::interval(14.0, 20.0);
    auto r = min_rate_cost(100.0, kMaritime, S, ArrivalKind::Free, 0.0, 0.0, 0.0);
    REQUIRE(r.feasible);
    CHECK(r.v == doctest::Approx(0.1015 / 0.0072).epsilon(1e-9));
    CHECK(r.value == doctest::Approx(16.9366).epsilon(1e-4));
    // grid oracle at 1e-5 step
    CHECK(r.value == doctest::Approx(testutil::grid_min_value(100.0, kMaritime, 14.0, 20.0))
                         .epsilon(1e-4));
}

TEST_CASE("exact arrival forces the speed") {
    SpeedWindow S = SpeedWindow::interval(14.0, 20.0);
    auto r = min_rate_cost(80.0, kMaritime, S, ArrivalKind::Exactly, 5.0, 0.0, 0.0);
    REQUIRE(r.feasible);
    CHECK(r.v == doctest::Approx(16.0));
    CHECK(r.value == doctest::Approx(80.0 * 0.1824).epsilon(1e-12));
}

TEST_CASE("arrival bound above the speed limit is infeasible") {
    SpeedWindow S = SpeedWindow::interval(14.0, 20.0);
    auto r = min_rate_cost(80.0, kMaritime, S, ArrivalKind::AtMost, 3.9, 0.0, 0.0);
    CHECK(!r.feasible);  // needs 80/3.9 > 20
}

TEST_CASE("exact arrival outside the window is infeasible") {
    SpeedWindow S = SpeedWindow::interval(14.0, 20.0);
    auto r = min_rate_cost(80.0, kMaritime, S, ArrivalKind::Exactly, 80.0 / 13.0, 0.0, 0.0);
    CHECK(!r.feasible);  // 13 < lo
    auto r2 = min_rate_cost(80.0, kMaritime, S, ArrivalKind::Exactly, -1.0, 0.0, 0.0);
    CHECK(!r2.feasible);  // no time at all
}

TEST_CASE("intersect_time_window inverts the algebra") {
    SpeedWindow S = SpeedWindow::interval(14.0, 20.0);
    auto W = intersect_time_window(S, 200.0, 0.0, 10.0, 12.0);
    REQUIRE(!W.empty());
    CHECK(W.lo == doctest::Approx(200.0 / 12.0).epsilon(1e-12));
    CHECK(W.hi == doctest::Approx(20.0));

    // b already elapsed
    CHECK(intersect_time_window(S, 50.0, 12.0, 1.0, 10.0).empty());

    // non-binding window
    auto W2 = intersect_time_window(S, 100.0, 2.0, 4.0, 100.0);
    REQUIRE(!W2.empty());
    CHECK(W2.lo == doctest::Approx(14.0));
    CHECK(W2.hi == doctest::Approx(20.0));
}

TEST_CASE("intersect is monotone and idempotent") {
    testutil::Rng rng(71);
    for (int t = 0; t < 300; ++t) {
        SpeedWindow S = SpeedWindow::interval(14.0 + 6.0 * rng.u01(), 20.0);
        if (S.empty()) continue;
        double D = rng.uniform(10.0, 500.0);
        double dps = rng.uniform(0.0, 30.0);
        double a = rng.uniform(0.0, 40.0);
        double b = a + rng.uniform(0.0, 40.0);
        auto W1 = intersect_time_window(S, D, dps, a, b);
        if (!W1.empty()) {
            CHECK(W1.lo >= S.lo - kBoundaryEps);
            CHECK(W1.hi <= S.hi + kBoundaryEps);
            auto W2 = intersect_time_window(W1, D, dps, a, b);
            REQUIRE(!W2.empty());
            CHECK(W2.lo == doctest::Approx(W1.lo).epsilon(1e-12));
            CHECK(W2.hi == doctest::Approx(W1.hi).epsilon(1e-12));
        }
    }
}

TEST_CASE("min_rate_cost agrees with a 1e-5 grid on random calls") {
    testutil::Rng rng(9);
    const CostFunction prp = CostFunction::uk_prp();
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
        bool use_prp = rng.u01() < 0.5;
        const CostFunction& f = use_prp ? prp : kMaritime;
        double lo = use_prp ? 15.4 : 14.0;
        double hi = use_prp ? 25.0 : 20.0;
        SpeedWindow S = SpeedWindow::interval(rng.uniform(lo, hi - 0.5), hi);
        double D = rng.uniform(5.0, 400.0);
        double tc = rng.u01() < 0.3 ? rng.uniform(0.0, 0.3 * f.rate(hi)) : 0.0;
        int kind = static_cast<int>(rng.uniform_int(0, 2));
        double depart = rng.uniform(0.0, 10.0);
        double elapsed = rng.uniform(0.0, 5.0);
        double deadline = depart + elapsed + D / rng.uniform(S.lo, S.hi);
        ArrivalKind ak = kind == 0   ? ArrivalKind::Free
                         : kind == 1 ? ArrivalKind::AtMost
                                     : ArrivalKind::Exactly;
        auto r = min_rate_cost(D, f, S, ak, deadline, depart, elapsed, tc);
        if (!r.feasible) continue;
        ++checked;
        // result respects the window and the arrival constraint
        CHECK(S.contains(r.v, 1e-9));
        if (ak != ArrivalKind::Free) {
            double arr = depart + elapsed + D / r.v;
            if (ak == ArrivalKind::AtMost) CHECK(arr <= deadline + 1e-6);
            if (ak == ArrivalKind::Exactly) CHECK(arr == doctest::Approx(deadline).epsilon(1e-9));
        }
        // value against grid search over the feasible speed set
        double glo = S.lo, ghi = S.hi;
        if (ak == ArrivalKind::AtMost) glo = std::max(glo, D / (deadline - depart - elapsed));
        if (ak == ArrivalKind::Exactly) glo = ghi = D / (deadline - depart - elapsed);
        double gval = testutil::grid_min_value(D, f, glo, ghi, tc);
        CHECK(r.value <= gval + 1e-4 * std::max(1.0, std::fabs(gval)));
        CHECK(r.value >= gval - 1e-4 * std::max(1.0, std::fabs(gval)));
    }
    CHECK(checked > 300);
}

TEST_CASE("empty windows are explicit") {
    auto e = SpeedWindow::none();
    CHECK(e.empty());
    CHECK(!e.contains(15.0));
    auto w = SpeedWindow::interval(16.0, 15.0);
    CHECK(w.empty());
    auto s = SpeedWindow::interval(15.0, 15.0);
    CHECK(s.singleton());
}
