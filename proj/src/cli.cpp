#include "jrsp/cli.hpp"

#include "jrsp/validation.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace jrsp::cli {

namespace {

using nlohmann::json;

int log_level() {
    const char* env = std::getenv("JRSP_LOG");
    if (!env) return 0;
    std::string v(env);
    if (v == "info") return 1;
    if (v == "trace") return 2;
    return 0;
}

InstanceFormat format_from_string(const std::string& s) {
    if (s == "json") return InstanceFormat::CanonicalJson;
    if (s == "maritime") return InstanceFormat::MaritimeTxt;
    if (s == "uk") return InstanceFormat::UkPrpTxt;
    throw ParseError("unknown format '" + s + "'");
}

pricing::RouteVariant variant_from_string(const std::string& s) {
    if (s == "elementary") return pricing::RouteVariant::Elementary;
    if (s == "2cf") return pricing::RouteVariant::TwoCycleFree;
    if (s == "qroute") return pricing::RouteVariant::QRoute;
    throw ParseError("unknown variant '" + s + "'");
}

Instance load_instance(const std::string& path, const std::string& format) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str(), format_from_string(format));
}

json solution_to_json(const bcp::Solution& sol, bool include_timings) {
    json j;
    j["status"] = bcp::to_string(sol.status);
    j["blb"] = sol.blb;
    j["bub"] = sol.bub;
    json routes = json::array();
    for (const auto& r : sol.routes) {
        routes.push_back({{"seq", r.seq},
                          {"speeds", r.profile.speed},
                          {"starts", r.profile.start},
                          {"cost", r.cost}});
    }
    j["routes"] = routes;
    j["stats"] = {{"nodes", sol.stats.nodes},
                  {"columns", sol.stats.columns},
                  {"cuts", sol.stats.cuts},
                  {"seconds", include_timings ? sol.stats.seconds : 0.0}};
    return j;
}

int exit_code_for(bcp::SolveStatus s) {
    switch (s) {
        case bcp::SolveStatus::Optimal: return kExitOptimal;
        case bcp::SolveStatus::Feasible: return kExitFeasible;
        case bcp::SolveStatus::Infeasible: return kExitInfeasible;
        case bcp::SolveStatus::TimeLimit: return kExitTimeLimit;
    }
    return kExitUsage;
}

std::vector<int> parse_route_arg(const std::string& s) {
    std::vector<int> seq;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        seq.push_back(std::stoi(tok));
    }
    return seq;
}

}  // namespace

std::string RunReport::to_json(bool include_timings) const {
    json j;
    j["instance"] = instance_id;
    j["options"] = options_echo;
    j["revalidated"] = revalidated;
    j["solution"] = solution_to_json(solution, include_timings);
    j["timings"] = {{"total", include_timings ? solution.stats.seconds : 0.0},
                    {"lp", include_timings ? solution.stats.lp_seconds : 0.0},
                    {"pricing", include_timings ? solution.stats.pricing_seconds : 0.0}};
    return j.dump(2);
}

std::string RunReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    int idx = 0;
    for (const auto& r : solution.routes) {
        os << "route," << idx++ << "," << r.cost << ",\"";
        for (std::size_t i = 0; i < r.seq.size(); ++i) os << (i ? " " : "") << r.seq[i];
        os << "\",\"";
        for (std::size_t i = 0; i < r.profile.speed.size(); ++i)
            os << (i ? " " : "") << r.profile.speed[i];
        os << "\",\"";
        for (std::size_t i = 0; i < r.profile.start.size(); ++i)
            os << (i ? " " : "") << r.profile.start[i];
        os << "\"\n";
    }
    os << "summary," << bcp::to_string(solution.status) << "," << solution.blb << ","
       << solution.bub << "," << solution.stats.nodes << "," << solution.stats.columns << ","
       << solution.stats.cuts << "," << solution.stats.seconds << "\n";
    return os.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"jrsp: exact branch-cut-and-price solver for joint routing and speed optimization"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "solve an instance to optimality");
    std::string instance_path, format = "json", variant = "elementary", out_path, emit = "json",
                cuts = "on";
    double time_limit = 600.0;
    solve->add_option("--instance", instance_path, "instance file")->required();
    solve->add_option("--format", format, "json|maritime|uk");
    solve->add_option("--variant", variant, "elementary|2cf|qroute");
    solve->add_option("--time-limit", time_limit, "seconds");
    solve->add_option("--cuts", cuts, "on|off");
    solve->add_option("--out", out_path, "write the solution to this path");
    solve->add_option("--emit", emit, "json|csv");

    // sop
    auto* sop_cmd = app.add_subcommand("sop", "evaluate a fixed route");
    std::string sop_instance, sop_format = "json", route_arg;
    sop_cmd->add_option("--instance", sop_instance, "instance file")->required();
    sop_cmd->add_option("--format", sop_format, "json|maritime|uk");
    sop_cmd->add_option("--route", route_arg, "comma-separated, e.g. 0,3,1,0")->required();

    // validate
    auto* val = app.add_subcommand("validate", "run the oracle suites");
    int val_n = 6, val_trials = 25;
    std::uint64_t val_seed = 7;
    val->add_option("--n", val_n, "max customers per trial");
    val->add_option("--trials", val_trials, "trials per suite");
    val->add_option("--seed", val_seed, "rng seed");

    // gen
    auto* gen = app.add_subcommand("gen", "generate an instance");
    int gen_n = 5, gen_k = 2;
    double gen_q = -1.0, gen_width = -1.0;
    std::string gen_family = "deep", gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--n", gen_n, "customers");
    gen->add_option("--k", gen_k, "vehicles");
    gen->add_option("--q", gen_q, "capacity (default: derived)");
    gen->add_option("--family", gen_family, "deep|short|uk_like");
    gen->add_option("--window-width", gen_width, "time window width");
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--out", gen_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }

    const int verbosity = log_level();
    try {
        if (solve->parsed()) {
            Instance inst = load_instance(instance_path, format);
            bcp::BcpOptions opt;
            opt.variant = variant_from_string(variant);
            opt.time_limit = time_limit;
            opt.cuts_on = cuts != "off";
            if (verbosity >= 1)
                err << "solving " << instance_path << " (n=" << inst.n << ", K=" << inst.K
                    << ", variant=" << variant << ")\n";
            bcp::Solution sol = bcp::solve_bcp(inst, opt);

            RunReport report;
            report.instance_id = instance_path;
            std::ostringstream oe;
            oe << "variant=" << variant << " cuts=" << cuts << " time_limit=" << time_limit;
            report.options_echo = oe.str();
            report.solution = sol;
            report.revalidated = sol.revalidated;

            std::string payload = emit == "csv"
                                      ? report.to_csv()
                                      : solution_to_json(sol, true).dump(2) + "\n";
            if (!out_path.empty()) {
                std::ofstream of(out_path);
                if (!of) throw ParseError("cannot write '" + out_path + "'");
                of << payload;
            } else {
                out << payload;
            }
            if (verbosity >= 1)
                err << "status=" << bcp::to_string(sol.status) << " blb=" << sol.blb
                    << " bub=" << sol.bub << " nodes=" << sol.stats.nodes << "\n";
            return exit_code_for(sol.status);
        }

        if (sop_cmd->parsed()) {
            Instance inst = load_instance(sop_instance, sop_format);
            std::vector<int> seq = parse_route_arg(route_arg);
            sop::Route route(seq);
            if (!route.well_formed(inst)) {
                err << "route must be 0,...,0 over valid customers\n";
                return kExitUsage;
            }
            auto r = sop::optimal_route_cost(inst, route);
            json j;
            j["feasible"] = r.feasible;
            if (r.feasible) {
                j["cost"] = r.cost;
                j["speeds"] = r.profile.speed;
                j["starts"] = r.profile.start;
                j["active"] = r.pattern.active;
            }
            out << j.dump(2) << "\n";
            return r.feasible ? kExitOptimal : kExitInfeasible;
        }

        if (val->parsed()) {
            using namespace validation;
            bool ok = true;
            auto report = [&](const char* name, const SuiteResult& r) {
                out << (r.ok() ? "[PASS] " : "[FAIL] ") << name << ": trials=" << r.trials
                    << " failures=" << r.failures << " worst_gap=" << r.worst_gap << "\n";
                ok = ok && r.ok();
            };
            report("sop-vs-grid-oracle",
                   sop_agreement_suite(val_trials, std::min(val_n, 8), val_seed, 1e-4));
            report("bcp-vs-partition-oracle",
                   bcp_oracle_suite(std::max(1, val_trials / 3), std::min(val_n, 6), 3,
                                    val_seed + 1, 1e-3));
            report("dominance-on-off",
                   dominance_onoff_suite(std::max(1, val_trials / 2), std::min(val_n, 5),
                                         val_seed + 2, 1e-6));
            return ok ? kExitOptimal : kExitFeasible;
        }

        if (gen->parsed()) {
            GenerateParams gp;
            gp.n = gen_n;
            gp.K = gen_k;
            gp.Q = gen_q;
            gp.window_width = gen_width;
            gp.seed = gen_seed;
            if (gen_family == "deep")
                gp.family = InstanceFamily::Deep;
            else if (gen_family == "short")
                gp.family = InstanceFamily::Short;
            else if (gen_family == "uk_like")
                gp.family = InstanceFamily::UkLike;
            else {
                err << "unknown family '" << gen_family << "'\n";
                return kExitUsage;
            }
            Instance inst = generate_instance(gp);
            std::string payload = to_canonical_json(inst) + "\n";
            if (!gen_out.empty()) {
                std::ofstream of(gen_out);
                if (!of) throw ParseError("cannot write '" + gen_out + "'");
                of << payload;
            } else {
                out << payload;
            }
            return kExitOptimal;
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace jrsp::cli
