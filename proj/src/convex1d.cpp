#include "jrsp/convex1d.hpp"

#include <algorithm>
#include <cmath>

namespace jrsp::convex1d {

namespace {

double objective(double D, const CostFunction& cost, double v, double time_cost) {
    double val = D * cost.rate(v);
    if (time_cost > 0.0) val += time_cost * D / v;
    return val;
}

}  // namespace

SegmentResult min_rate_cost(double D, const CostFunction& cost, const SpeedWindow& S,
                            ArrivalKind arrival, double deadline, double depart,
                            double elapsed_service, double time_cost) {
    SegmentResult res;
    if (S.empty() || !(D > 0.0)) return res;

    double lo = S.lo;
    double hi = S.hi;
    if (arrival != ArrivalKind::Free) {
        double slack = deadline - depart - elapsed_service;
        if (slack <= kBoundaryEps) return res;  // no time left to travel
        double v_req = D / slack;
        if (arrival == ArrivalKind::Exactly) {
            if (!S.contains(v_req)) return res;
            v_req = std::clamp(v_req, S.lo, S.hi);
            res.feasible = true;
            res.v = v_req;
            res.value = objective(D, cost, v_req, time_cost);
            return res;
        }
        lo = std::max(lo, v_req);  // AtMost: must be at least this fast
        if (lo > hi + kBoundaryEps) return res;
        hi = std::max(lo, hi);
    }

    double v = std::clamp(cost.minimizer(time_cost), lo, hi);
    res.feasible = true;
    res.v = v;
    res.value = objective(D, cost, v, time_cost);
    return res;
}

SpeedWindow intersect_time_window(const SpeedWindow& S, double D, double depart_plus_service,
                                  double a, double b) {
    if (S.empty()) return SpeedWindow::none();
    if (!(D > 0.0)) {
        // zero-length hop: arrival is depart_plus_service itself
        bool inside = depart_plus_service >= a - kBoundaryEps &&
                      depart_plus_service <= b + kBoundaryEps;
        return inside ? S : SpeedWindow::none();
    }
    double lo = S.lo;
    double hi = S.hi;
    if (b <= depart_plus_service + kBoundaryEps) return SpeedWindow::none();
    lo = std::max(lo, D / (b - depart_plus_service));
    if (a > depart_plus_service + kBoundaryEps) hi = std::min(hi, D / (a - depart_plus_service));
    return SpeedWindow::interval(lo, hi);
}

}  // namespace jrsp::convex1d
