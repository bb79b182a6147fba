#include "jrsp/model.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace jrsp {

// ---------------------------------------------------------------------------
// CostFunction

CostFunction CostFunction::quadratic(double c2, double c1, double c0) {
    if (c2 <= 0.0) throw ValidationError("quadratic_rate requires c2 > 0");
    CostFunction f;
    f.kind = CostKind::QuadraticRate;
    f.c2 = c2;
    f.c1 = c1;
    f.c0 = c0;
    f.v_rate_min = -c1 / (2.0 * c2);
    return f;
}

CostFunction CostFunction::prp(double pi1, double pi2) {
    if (pi1 <= 0.0 || pi2 <= 0.0) throw ValidationError("prp_rate requires pi1, pi2 > 0");
    CostFunction f;
    f.kind = CostKind::PrpRate;
    f.pi1 = pi1;
    f.pi2 = pi2;
    f.v_rate_min = std::cbrt(pi1 / (2.0 * pi2));
    return f;
}

CostFunction CostFunction::maritime() { return quadratic(0.0036, -0.1015, 0.8848); }

CostFunction CostFunction::uk_prp() { return prp(1.42e-3, 1.98e-7); }

double CostFunction::rate(double v) const {
    if (v <= 0.0) throw ValidationError("rate_eval requires v > 0");
    if (kind == CostKind::QuadraticRate) return (c2 * v + c1) * v + c0;
    return pi1 / v + pi2 * v * v;
}

double CostFunction::rate_prime(double v) const {
    if (v <= 0.0) throw ValidationError("rate_eval requires v > 0");
    if (kind == CostKind::QuadraticRate) return 2.0 * c2 * v + c1;
    return -pi1 / (v * v) + 2.0 * pi2 * v;
}

double CostFunction::minimizer(double time_cost) const {
    if (time_cost < 0.0) throw ValidationError("time_cost must be nonnegative");
    if (time_cost == 0.0) return v_rate_min;
    if (kind == CostKind::PrpRate) {
        // f(v) + w/v = (pi1 + w)/v + pi2 v^2, same family.
        return std::cbrt((pi1 + time_cost) / (2.0 * pi2));
    }
    // g'(v) = 2 c2 v + c1 - w / v^2, strictly increasing on (0, inf).
    double lo = 1e-9;
    double hi = std::max(v_rate_min, 1.0);
    while (2.0 * c2 * hi + c1 - time_cost / (hi * hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double g = 2.0 * c2 * mid + c1 - time_cost / (mid * mid);
        if (g < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

void CostFunction::check_convex(double lo, double hi) const {
    if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("speed bounds must satisfy 0 < lo <= hi");
    const int samples = 32;
    for (int k = 0; k < samples; ++k) {
        double v = lo + (hi - lo) * (k + 0.5) / samples;
        double h = std::max(1e-6, 1e-6 * v);
        double second = (rate(v + h) - 2.0 * rate(v) + rate(v - h)) / (h * h);
        if (!(second > 0.0))
            throw ValidationError("cost function is not strictly convex on the speed range");
    }
}

// ---------------------------------------------------------------------------
// Instance

double Instance::v_f() const { return std::clamp(cost.v_rate_min, speed_lo, speed_hi); }

double Instance::speed_floor() const { return std::max(speed_lo, v_f()); }

void Instance::validate() const {
    if (n < 1) throw ValidationError("instance needs at least one customer");
    if (K < 1) throw ValidationError("fleet size must be positive");
    if (!(Q >= 0.0)) throw ValidationError("capacity must be nonnegative");
    if (!(speed_lo > 0.0) || !(speed_lo <= speed_hi))
        throw ValidationError("speed bounds must satisfy 0 < l <= u");
    if (static_cast<int>(vertex.size()) != n + 1)
        throw ValidationError("vertex table size mismatch");
    if (static_cast<int>(dist.size()) != n + 1)
        throw ValidationError("distance matrix size mismatch");
    for (const auto& row : dist) {
        if (static_cast<int>(row.size()) != n + 1)
            throw ValidationError("distance matrix row size mismatch");
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("distances must be finite and >= 0");
    }
    if (vertex[0].a != 0.0) throw ValidationError("depot window must start at 0");
    if (vertex[0].demand != 0.0) throw ValidationError("depot demand must be 0");
    for (int i = 0; i <= n; ++i) {
        const auto& v = vertex[i];
        if (v.a > v.b) {
            std::ostringstream os;
            os << "vertex " << i << ": window has a > b";
            throw ValidationError(os.str());
        }
        if (v.service < 0.0) throw ValidationError("service durations must be >= 0");
        if (v.demand < 0.0) throw ValidationError("demands must be >= 0");
        if (i >= 1 && v.demand > Q) {
            std::ostringstream os;
            os << "vertex " << i << ": demand exceeds capacity";
            throw ValidationError(os.str());
        }
    }
    cost.check_convex(speed_lo, speed_hi);
    if (n > 62) throw ValidationError("instances above 62 customers are not supported");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

using nlohmann::json;

CostFunction cost_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    const auto& coeffs = j.at("coeffs");
    CostFunction f;
    if (kind == "quadratic_rate") {
        if (coeffs.size() != 3) throw ParseError("quadratic_rate expects 3 coefficients");
        f = CostFunction::quadratic(coeffs[0].get<double>(), coeffs[1].get<double>(),
                                    coeffs[2].get<double>());
    } else if (kind == "prp_rate") {
        if (coeffs.size() != 2) throw ParseError("prp_rate expects 2 coefficients");
        f = CostFunction::prp(coeffs[0].get<double>(), coeffs[1].get<double>());
    } else {
        throw ParseError("unknown cost kind '" + kind + "'");
    }
    f.wage_rate = j.value("wage_rate", 0.0);
    f.load_coeff = j.value("load_coeff", 0.0);
    if (f.wage_rate < 0.0 || f.load_coeff < 0.0)
        throw ParseError("wage_rate and load_coeff must be >= 0");
    return f;
}

Instance parse_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    Instance inst;
    try {
        inst.n = j.at("n").get<int>();
        inst.K = j.at("K").get<int>();
        inst.Q = j.at("Q").get<double>();
        inst.speed_lo = j.at("speed_lo").get<double>();
        inst.speed_hi = j.at("speed_hi").get<double>();
        inst.cost = cost_from_json(j.at("cost"));
        const auto& verts = j.at("vertices");
        if (static_cast<int>(verts.size()) != inst.n + 1)
            throw ParseError("expected n+1 vertex entries");
        inst.vertex.resize(inst.n + 1);
        for (const auto& v : verts) {
            int id = v.at("id").get<int>();
            if (id < 0 || id > inst.n) throw ParseError("vertex id out of range");
            inst.vertex[id] = Vertex{v.at("demand").get<double>(), v.at("a").get<double>(),
                                     v.at("b").get<double>(), v.at("service").get<double>()};
        }
        inst.dist = j.at("dist").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    inst.validate();
    return inst;
}

struct LineReader {
    std::istringstream in;
    int line_no = 0;

    explicit LineReader(const std::string& text) : in(text) {}

    // next non-empty, non-comment line
    bool next(std::string& out) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            auto pos = line.find('#');
            if (pos != std::string::npos) line.erase(pos);
            bool blank = true;
            for (char c : line)
                if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
            if (!blank) {
                out = line;
                return true;
            }
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream os;
        os << "line " << line_no << ": " << what;
        throw ParseError(os.str());
    }
};

// Shared text layout: header `n K Q l u`, a cost line, n+1 vertex lines
// `id q a b tau x y`, then `EUCLIDEAN` or `MATRIX` (+ (n+1)^2 entries).
Instance parse_txt(const std::string& text, InstanceFormat format) {
    LineReader rd(text);
    std::string line;
    if (!rd.next(line)) rd.fail("missing header line 'n K Q l u'");
    Instance inst;
    {
        std::istringstream ls(line);
        if (!(ls >> inst.n >> inst.K >> inst.Q >> inst.speed_lo >> inst.speed_hi))
            rd.fail("malformed header, expected 'n K Q l u'");
    }
    if (!rd.next(line)) rd.fail("missing cost coefficient line");
    {
        std::istringstream ls(line);
        if (format == InstanceFormat::MaritimeTxt) {
            double c2, c1, c0;
            if (!(ls >> c2 >> c1 >> c0)) rd.fail("maritime cost line expects 'c2 c1 c0'");
            inst.cost = CostFunction::quadratic(c2, c1, c0);
        } else {
            double pi1, pi2, wage = 0.0, load = 0.0;
            if (!(ls >> pi1 >> pi2)) rd.fail("uk cost line expects 'pi1 pi2 [wage [load]]'");
            ls >> wage >> load;
            inst.cost = CostFunction::prp(pi1, pi2);
            inst.cost.wage_rate = wage;
            inst.cost.load_coeff = load;
        }
    }
    inst.vertex.resize(inst.n + 1);
    std::vector<double> xs(inst.n + 1), ys(inst.n + 1);
    std::vector<char> seen(inst.n + 1, 0);
    for (int k = 0; k <= inst.n; ++k) {
        if (!rd.next(line)) rd.fail("missing vertex line");
        std::istringstream ls(line);
        int id;
        double q, a, b, tau, x, y;
        if (!(ls >> id >> q >> a >> b >> tau >> x >> y))
            rd.fail("vertex line expects 'id q a b tau x y'");
        if (id < 0 || id > inst.n) rd.fail("vertex id out of range");
        if (seen[id]) rd.fail("duplicate vertex id");
        seen[id] = 1;
        inst.vertex[id] = Vertex{q, a, b, tau};
        xs[id] = x;
        ys[id] = y;
    }
    if (!rd.next(line)) rd.fail("missing distance section (EUCLIDEAN or MATRIX)");
    std::istringstream ls(line);
    std::string mode;
    ls >> mode;
    inst.dist.assign(inst.n + 1, std::vector<double>(inst.n + 1, 0.0));
    if (mode == "EUCLIDEAN") {
        for (int i = 0; i <= inst.n; ++i)
            for (int j = 0; j <= inst.n; ++j)
                inst.dist[i][j] = std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
    } else if (mode == "MATRIX") {
        int need = (inst.n + 1) * (inst.n + 1);
        std::vector<double> entries;
        entries.reserve(need);
        double v;
        while (static_cast<int>(entries.size()) < need) {
            if (!(ls >> v)) {
                if (!rd.next(line)) rd.fail("distance matrix has too few entries");
                ls = std::istringstream(line);
                continue;
            }
            entries.push_back(v);
        }
        for (int i = 0; i <= inst.n; ++i)
            for (int j = 0; j <= inst.n; ++j) inst.dist[i][j] = entries[i * (inst.n + 1) + j];
    } else {
        rd.fail("expected EUCLIDEAN or MATRIX");
    }
    inst.validate();
    return inst;
}

}  // namespace

Instance parse_instance(const std::string& text, InstanceFormat format) {
    switch (format) {
        case InstanceFormat::CanonicalJson:
            return parse_json(text);
        case InstanceFormat::MaritimeTxt:
        case InstanceFormat::UkPrpTxt:
            return parse_txt(text, format);
    }
    throw ParseError("unknown instance format");
}

std::string to_canonical_json(const Instance& inst, int indent) {
    json j;
    j["n"] = inst.n;
    j["K"] = inst.K;
    j["Q"] = inst.Q;
    j["speed_lo"] = inst.speed_lo;
    j["speed_hi"] = inst.speed_hi;
    json cost;
    if (inst.cost.kind == CostKind::QuadraticRate) {
        cost["kind"] = "quadratic_rate";
        cost["coeffs"] = {inst.cost.c2, inst.cost.c1, inst.cost.c0};
    } else {
        cost["kind"] = "prp_rate";
        cost["coeffs"] = {inst.cost.pi1, inst.cost.pi2};
    }
    cost["wage_rate"] = inst.cost.wage_rate;
    cost["load_coeff"] = inst.cost.load_coeff;
    j["cost"] = cost;
    json verts = json::array();
    for (int i = 0; i <= inst.n; ++i) {
        const auto& v = inst.vertex[i];
        verts.push_back({{"id", i},
                         {"demand", v.demand},
                         {"a", v.a},
                         {"b", v.b},
                         {"service", v.service}});
    }
    j["vertices"] = verts;
    j["dist"] = inst.dist;
    return j.dump(indent);
}

// ---------------------------------------------------------------------------
// Time-window tightening (four rules iterated to a fixpoint)

TightenResult tighten_time_windows(const Instance& inst) {
    TightenResult res;
    res.instance = inst;
    Instance& t = res.instance;
    const int n = inst.n;
    const double u = inst.speed_hi;
    const double l = inst.speed_floor();

    const int pass_cap = 4 * n + 1;
    bool changed = true;
    while (changed) {
        if (res.passes >= pass_cap) {
            res.hit_pass_cap = true;
            break;
        }
        ++res.passes;
        changed = false;
        // Rules touch customers only; the depot keeps its dual
        // departure/return window.
        for (int k = 1; k <= n; ++k) {
            auto& vk = t.vertex[k];
            double best;

            // earliest possible arrival from some predecessor
            best = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= n; ++i) {
                if (i == k) continue;
                best = std::min(best, t.vertex[i].a + t.vertex[i].service + t.d(i, k) / u);
            }
            if (best > vk.a + 1e-12) {
                vk.a = best;
                changed = true;
            }

            // serving earlier than every successor's a minus the slowest
            // travel only produces waiting that could start at k instead
            best = std::numeric_limits<double>::infinity();
            for (int j = 0; j <= n; ++j) {
                if (j == k) continue;
                best = std::min(best, t.vertex[j].a - t.d(k, j) / l - vk.service);
            }
            if (best > vk.a + 1e-12) {
                vk.a = best;
                changed = true;
            }

            // latest useful service start given the latest arrival from
            // any predecessor (waiting shifted onto earlier service)
            double worst = -std::numeric_limits<double>::infinity();
            for (int i = 0; i <= n; ++i) {
                if (i == k) continue;
                worst = std::max(worst, t.vertex[i].b + t.vertex[i].service + t.d(i, k) / l);
            }
            worst = std::max(vk.a, worst);
            if (worst < vk.b - 1e-12) {
                vk.b = worst;
                changed = true;
            }

            // must still be able to reach some successor before its deadline
            worst = -std::numeric_limits<double>::infinity();
            for (int j = 0; j <= n; ++j) {
                if (j == k) continue;
                worst = std::max(worst, t.vertex[j].b - t.d(k, j) / u - vk.service);
            }
            if (worst < vk.b - 1e-12) {
                vk.b = worst;
                changed = true;
            }
        }
    }
    for (int k = 1; k <= n; ++k) {
        if (t.vertex[k].a > t.vertex[k].b + 1e-9) {
            res.infeasible_vertex = k;
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Instance generator

namespace {

struct FamilyScale {
    double box;          // coordinate box side
    double service_lo, service_hi;
    double demand_lo, demand_hi;
    double width_default;
};

FamilyScale family_scale(InstanceFamily f) {
    switch (f) {
        case InstanceFamily::Deep:
            return {3000.0, 6.0, 30.0, 20.0, 120.0, 48.0};     // nm, hours
        case InstanceFamily::Short:
            return {500.0, 2.0, 10.0, 10.0, 60.0, 12.0};       // nm, hours
        case InstanceFamily::UkLike:
            return {400000.0, 600.0, 3600.0, 50.0, 400.0, 7200.0};  // m, seconds
    }
    return {1000.0, 1.0, 5.0, 1.0, 10.0, 10.0};
}

}  // namespace

Instance generate_instance(const GenerateParams& params) {
    if (params.n < 1) throw ValidationError("generator needs n >= 1");
    if (params.K < 1) throw ValidationError("generator needs K >= 1");
    detail::Rng rng(params.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL +
                    static_cast<std::uint64_t>(params.n) * 131 +
                    static_cast<std::uint64_t>(params.K) * 17 +
                    static_cast<std::uint64_t>(params.family));

    Instance inst;
    inst.n = params.n;
    inst.K = params.K;
    const FamilyScale fs = family_scale(params.family);
    if (params.family == InstanceFamily::UkLike) {
        inst.cost = CostFunction::uk_prp();
        inst.speed_lo = 5.56;   // 20 km/h
        inst.speed_hi = 25.0;   // 90 km/h
    } else {
        inst.cost = CostFunction::maritime();
        inst.speed_lo = 14.0;
        inst.speed_hi = 20.0;
    }

    const int n = inst.n;
    std::vector<double> xs(n + 1), ys(n + 1);
    xs[0] = fs.box * 0.5;
    ys[0] = fs.box * 0.5;
    for (int i = 1; i <= n; ++i) {
        xs[i] = rng.uniform(0.0, fs.box);
        ys[i] = rng.uniform(0.0, fs.box);
    }
    inst.dist.assign(n + 1, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            if (i != j) inst.dist[i][j] = std::max(1e-6, std::hypot(xs[i] - xs[j], ys[i] - ys[j]));

    inst.vertex.resize(n + 1);
    double total_demand = 0.0;
    for (int i = 1; i <= n; ++i) {
        inst.vertex[i].demand = std::floor(rng.uniform(fs.demand_lo, fs.demand_hi));
        inst.vertex[i].service = rng.uniform(fs.service_lo, fs.service_hi);
        total_demand += inst.vertex[i].demand;
    }

    // Reference solution first: random permutation split into K blocks by
    // capacity, driven at speed u; windows are carved around its schedule.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i + 1;
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_int(0, i)]);

    double max_demand = 0.0;
    for (int i = 1; i <= n; ++i) max_demand = std::max(max_demand, inst.vertex[i].demand);
    double cap = params.Q;
    if (cap < 0.0) cap = std::max(max_demand, std::ceil(total_demand / params.K * 1.3) + max_demand);
    inst.Q = cap;

    std::vector<std::vector<int>> blocks(params.K);
    {
        int b = 0;
        double load = 0.0;
        double worst = 0.0;
        for (int v : perm) {
            if (load + inst.vertex[v].demand > cap && !blocks[b].empty() && b + 1 < params.K) {
                ++b;
                load = 0.0;
            }
            blocks[b].push_back(v);
            load += inst.vertex[v].demand;
            worst = std::max(worst, load);
        }
        // self-repair: the reference split must respect the capacity
        inst.Q = cap = std::max(cap, worst);
    }

    const double u = inst.speed_hi;
    double width = params.window_width > 0.0 ? params.window_width : fs.width_default;
    double horizon_end = 0.0;
    for (const auto& block : blocks) {
        double t = 0.0;
        int prev = 0;
        for (int v : block) {
            t += inst.dist[prev][v] / u;
            // reference serves at t (possibly after a drawn head start)
            double lead = width * rng.u01();
            double tail = width * (0.25 + 0.75 * rng.u01());
            inst.vertex[v].a = std::max(0.0, t - lead);
            inst.vertex[v].b = t + tail;
            t += inst.vertex[v].service;
            prev = v;
        }
        t += inst.dist[prev][0] / u;
        horizon_end = std::max(horizon_end, t);
    }
    inst.vertex[0] = Vertex{0.0, 0.0, horizon_end * 1.5 + width, 0.0};

    inst.validate();
    return inst;
}

}  // namespace jrsp
