#pragma once

// Instance data model: cost functions, parsers, generator, and
// time-window preprocessing.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jrsp {

enum class CostKind { QuadraticRate, PrpRate };

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : ModelError {
    using ModelError::ModelError;
};
struct ValidationError : ModelError {
    using ModelError::ModelError;
};

// Fuel rate per unit distance as a function of speed.
//   QuadraticRate: f(v) = c2 v^2 + c1 v + c0
//   PrpRate:       f(v) = pi1 / v + pi2 v^2
// Both are strictly convex on (0, inf) for the admissible coefficients.
struct CostFunction {
    CostKind kind = CostKind::QuadraticRate;
    double c2 = 0.0, c1 = 0.0, c0 = 0.0;
    double pi1 = 0.0, pi2 = 0.0;
    double wage_rate = 0.0;   // cost per time unit of total route duration
    double load_coeff = 0.0;  // cost per demand unit per distance unit carried
    double v_rate_min = 0.0;  // unclamped minimizer of f on (0, inf)

    static CostFunction quadratic(double c2, double c1, double c0);
    static CostFunction prp(double pi1, double pi2);
    // The bunker rate 0.0036 v^2 - 0.1015 v + 0.8848 used by the maritime families.
    static CostFunction maritime();
    // pi1 = 1.42e-3, pi2 = 1.98e-7, the road-transport calibration.
    static CostFunction uk_prp();

    double rate(double v) const;
    double rate_prime(double v) const;
    // Minimizer of f(v) + time_cost / v over (0, inf); time_cost >= 0.
    double minimizer(double time_cost = 0.0) const;
    // Throws ValidationError if f is not strictly convex on [lo, hi]
    // (checked numerically at 32 sample points).
    void check_convex(double lo, double hi) const;
};

struct Vertex {
    double demand = 0.0;
    double a = 0.0;
    double b = 0.0;
    double service = 0.0;
};

struct Instance {
    int n = 0;       // customers, vertices 1..n; vertex 0 is the depot
    int K = 0;       // fleet size
    double Q = 0.0;  // vehicle capacity
    double speed_lo = 0.0, speed_hi = 0.0;
    CostFunction cost;
    std::vector<Vertex> vertex;              // size n+1
    std::vector<std::vector<double>> dist;   // (n+1) x (n+1), row-major from depot row

    double d(int i, int j) const { return dist[i][j]; }
    double demand_of(int i) const { return vertex[i].demand; }
    // Minimizer of the rate clamped into [speed_lo, speed_hi].
    double v_f() const;
    // Effective lower speed bound max(speed_lo, v_f()); no optimal
    // solution travels slower.
    double speed_floor() const;

    void validate() const;  // throws ValidationError on invariant violations
};

enum class InstanceFormat { CanonicalJson, MaritimeTxt, UkPrpTxt };

Instance parse_instance(const std::string& text, InstanceFormat format);
std::string to_canonical_json(const Instance& inst, int indent = 2);

struct TightenResult {
    Instance instance;
    int passes = 0;
    bool hit_pass_cap = false;           // flagged when the fixpoint loop is cut short
    std::optional<int> infeasible_vertex;  // a_k > b_k after tightening
};
TightenResult tighten_time_windows(const Instance& inst);

enum class InstanceFamily { Deep, Short, UkLike };

struct GenerateParams {
    int n = 5;
    int K = 2;
    double Q = -1.0;            // < 0: derived from the reference solution
    InstanceFamily family = InstanceFamily::Deep;
    double window_width = -1.0;  // < 0: family default
    std::uint64_t seed = 0;
};

// Deterministic for fixed params; the generated instance always admits at
// least one feasible solution (built first, then windows derived from it).
Instance generate_instance(const GenerateParams& params);

}  // namespace jrsp
