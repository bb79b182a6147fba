#pragma once

#include "jrsp/model.hpp"
#include "jrsp/sop.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace testutil {

// splitmix64, kept separate from the library's internals
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

// 1e-5-step grid minimization of D*(f(v)+tc/v) over [lo, hi]
inline double grid_min_value(double D, const jrsp::CostFunction& f, double lo, double hi,
                             double tc = 0.0, double step = 1e-5) {
    double best = std::numeric_limits<double>::infinity();
    for (double v = lo;; v += step) {
        bool last = v >= hi;
        double vv = last ? hi : v;
        double val = D * f.rate(vv) + (tc > 0 ? tc * D / vv : 0.0);
        if (val < best) best = val;
        if (last) break;
    }
    return best;
}

// a tiny hand-built instance: customers on a line, generous defaults
inline jrsp::Instance line_instance(int n, double spacing, double horizon, double Q = 100.0,
                                    int K = 2) {
    jrsp::Instance inst;
    inst.n = n;
    inst.K = K;
    inst.Q = Q;
    inst.speed_lo = 14.0;
    inst.speed_hi = 20.0;
    inst.cost = jrsp::CostFunction::maritime();
    inst.vertex.resize(n + 1);
    inst.vertex[0] = jrsp::Vertex{0.0, 0.0, horizon, 0.0};
    for (int i = 1; i <= n; ++i) inst.vertex[i] = jrsp::Vertex{1.0, 0.0, horizon, 0.0};
    inst.dist.assign(n + 1, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) inst.dist[i][j] = std::fabs(i - j) * spacing;
    return inst;
}

}  // namespace testutil
