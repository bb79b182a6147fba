#pragma once

// Closed-interval one-dimensional convex minimization and speed-window
// algebra. Every segment solve in the solver (F1/F2 extensions, depot
// return, dominance minima) reduces to one of these two functions.

#include "jrsp/model.hpp"

namespace jrsp::convex1d {

// Boundary-inclusion tolerance for all interval arithmetic.
inline constexpr double kBoundaryEps = 1e-9;

// Closed speed interval [lo, hi] or an explicit empty marker.
struct SpeedWindow {
    double lo = 0.0;
    double hi = 0.0;
    bool is_empty = true;

    static SpeedWindow none() { return SpeedWindow{}; }
    static SpeedWindow interval(double lo, double hi) {
        if (lo > hi + kBoundaryEps) return none();
        SpeedWindow w;
        w.lo = lo;
        w.hi = hi < lo ? lo : hi;  // collapse sub-tolerance inversions
        w.is_empty = false;
        return w;
    }

    bool empty() const { return is_empty; }
    bool contains(double v, double eps = kBoundaryEps) const {
        return !is_empty && v >= lo - eps && v <= hi + eps;
    }
    bool singleton(double eps = kBoundaryEps) const {
        return !is_empty && hi - lo <= eps;
    }
};

enum class ArrivalKind { Free, AtMost, Exactly };

struct SegmentResult {
    bool feasible = false;
    double v = 0.0;      // optimal speed
    double value = 0.0;  // D*f(v) + time_cost*D/v at the optimum
};

// Minimize D*(f(v) + time_cost/v) over S intersected with the arrival
// constraint. `deadline` is the target time T for AtMost/Exactly;
// `depart` is the service start at the segment head and
// `elapsed_service` the service time accumulated through the current
// last vertex, so the arrival at speed v is depart + elapsed_service + D/v.
SegmentResult min_rate_cost(double D, const CostFunction& cost, const SpeedWindow& S,
                            ArrivalKind arrival, double deadline, double depart,
                            double elapsed_service, double time_cost = 0.0);

// S ∩ {v : a <= depart_plus_service + D/v <= b}. D == 0 degenerates to a
// pure membership test of depart_plus_service in [a, b].
SpeedWindow intersect_time_window(const SpeedWindow& S, double D, double depart_plus_service,
                                  double a, double b);

}  // namespace jrsp::convex1d
