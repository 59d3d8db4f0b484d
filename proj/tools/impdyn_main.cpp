#include <chrono>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "impdyn/io.hpp"

namespace {

constexpr const char* kVersion = "impdyn 0.1.0";

using namespace impdyn;
namespace fs = std::filesystem;

struct RunContext {
    Scenario sc;
    fs::path out;
    std::vector<std::string> outputs;
    std::ostringstream summary;

    void emit(const std::string& name, const std::string& body) {
        write_text(out / name, body);
        outputs.push_back(name);
    }
};

int op_simulate(RunContext& ctx, const ImpulsiveSystem& sys) {
    Vec x0 = vec_from_json(ctx.sc.op.at("x0"));
    const double T = ctx.sc.op.at("T").get<double>();
    Trajectory tr = trajectory(sys, x0, T);
    ctx.emit("trajectory.csv", trajectory_csv(tr, sys.field.dim));
    ctx.emit("jumps.csv", jumps_csv(tr));
    if (ctx.sc.emit_plot_data) {
        std::ostringstream os;
        for (const TrajectoryArc& arc : tr.arcs)
            for (const auto& [t, p] : arc.samples) {
                os << fmt_g(p[0]);
                for (int i = 1; i < sys.field.dim; ++i) os << ',' << fmt_g(p[i]);
                os << '\n';
            }
        ctx.emit("plot_xy.csv", os.str());
    }
    ctx.summary << "simulate: " << tr.jumps.size() << " jumps over T=" << T
                << ", end status " << hit_status_name(tr.end_status) << "\n";
    return 0;
}

int op_hitmap(RunContext& ctx, const ImpulsiveSystem& sys) {
    const int grid = ctx.sc.op.value("grid", 64);
    std::ostringstream os;
    os << "cell,u0,u1,status,tau,dtau_u0\n";
    const CrossSection& S = sys.Dhat;
    const int n1 = S.chart_dim == 2 ? grid : 1;
    int id = 0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < n1; ++j, ++id) {
            Vec u(S.chart_dim);
            u[0] = S.box_lo[0] + (i + 0.5) * S.box_width(0) / grid;
            if (S.chart_dim == 2) u[1] = S.box_lo[1] + (j + 0.5) * S.box_width(1) / n1;
            std::string status = "domain_error";
            double tau = -1.0, d0 = 0.0;
            try {
                HitResult h = seek_section(sys.field, sys.D, S.chart(u), sys.opts.t_max, sys.opts);
                status = hit_status_name(h.status);
                if (h.status == HitStatus::ok || h.status == HitStatus::boundary) {
                    tau = h.tau1;
                    Mat tan = S.chart_tangent(u);
                    for (int k = 0; k < sys.field.dim; ++k) d0 += h.dtau1[k] * tan(k, 0);
                }
            } catch (const DomainError&) {
            }
            os << id << ',' << fmt_g(u[0]) << ',' << (S.chart_dim == 2 ? fmt_g(u[1]) : "")
               << ',' << status << ',' << fmt_g(tau) << ',' << fmt_g(d0) << '\n';
        }
    ctx.emit("hitmap.csv", os.str());
    ctx.summary << "hitmap: " << id << " cells\n";
    return 0;
}

int op_poincare(RunContext& ctx, const ImpulsiveSystem& sys) {
    Vec v = vec_from_json(ctx.sc.op.at("v"));
    const int iters = ctx.sc.op.value("iterations", 1);
    std::ostringstream os;
    os << "k,u0,u1,tau\n";
    os << 0 << ',' << fmt_g(v[0]) << ',' << (v.n == 2 ? fmt_g(v[1]) : "") << ",\n";
    int done = 0;
    for (int k = 1; k <= iters; ++k) {
        PoincareResult pr = poincare(sys, v);
        if (pr.status != HitStatus::ok) {
            ctx.summary << "poincare stopped at k=" << k << ": " << hit_status_name(pr.status)
                        << "\n";
            break;
        }
        v = pr.value;
        os << k << ',' << fmt_g(v[0]) << ',' << (v.n == 2 ? fmt_g(v[1]) : "") << ','
           << fmt_g(pr.tau) << '\n';
        ++done;
    }
    ctx.emit("poincare.csv", os.str());
    ctx.summary << "poincare: " << done << "/" << iters << " iterates\n";
    return 0;
}

int op_periodic(RunContext& ctx, const ImpulsiveSystem& sys) {
    Vec u0 = vec_from_json(ctx.sc.op.at("seed_point"));
    const int N = ctx.sc.op.value("returns", 1);
    PeriodicOpts po;
    po.tol = ctx.sc.op.value("tol", 1e-10);
    PeriodicSearch s = find_periodic(sys, u0, N, po);
    Json j;
    j["status"] = s.status == SolveStatus::ok ? "ok"
                  : s.status == SolveStatus::singular_jacobian ? "singular_jacobian"
                                                               : "not_found";
    if (s.status == SolveStatus::ok) j["orbit"] = orbit_to_json(s.orbit);
    ctx.emit("orbit.jsonl", j.dump() + "\n");
    if (s.status != SolveStatus::ok) {
        ctx.summary << "periodic: not found\n";
        return 2;
    }
    ctx.summary << "periodic: period " << fmt_g(s.orbit.period) << ", "
                << orbit_tag_name(s.orbit.tag) << "\n";
    return 0;
}

int op_audit(RunContext& ctx, const ImpulsiveSystem& sys) {
    const double n_max = ctx.sc.op.value("n_max", 2.0);
    const double eps_bd = ctx.sc.op.value("eps_bd", 0.0);
    const int seeds = ctx.sc.op.value("seeds", 16);
    AuditReport rep = audit_kupka_smale(sys, n_max, eps_bd, seeds);
    std::ostringstream os;
    for (const AuditEntry& e : rep.orbits) {
        Json j = orbit_to_json(e.orbit);
        j["seed"] = vec_to_json(e.seed);
        j["returns"] = e.returns;
        os << j.dump() << '\n';
    }
    ctx.emit("audit.jsonl", os.str());
    Json sum{{"orbits", rep.orbits.size()},
             {"all_hyperbolic", rep.all_hyperbolic},
             {"seeds_tried", rep.seeds_tried}};
    ctx.emit("audit_summary.json", sum.dump(2) + "\n");
    ctx.summary << "audit: " << rep.orbits.size() << " orbits, verdict "
                << (rep.all_hyperbolic ? "all hyperbolic" : "non-hyperbolic present") << "\n";
    return 0;
}

int op_chain(RunContext& ctx, const ImpulsiveSystem& sys) {
    const double h = ctx.sc.op.value("h", 0.01);
    const double delta = ctx.sc.op.value("delta", 0.01);
    PseudoOrbitGraph g = build_graph(sys, h, delta);
    std::ostringstream cells, edges, rec;
    cells << "cell_id,lo0,hi0,lo1,hi1,status\n";
    for (int c = 0; c < g.grid.cells(); ++c) {
        const double w0 = sys.Dhat.box_width(0) / g.grid.n0;
        const double lo0 = sys.Dhat.box_lo[0] + g.grid.i_of(c) * w0;
        std::string lo1, hi1;
        if (sys.Dhat.chart_dim == 2) {
            const double w1 = sys.Dhat.box_width(1) / g.grid.n1;
            lo1 = fmt_g(sys.Dhat.box_lo[1] + g.grid.j_of(c) * w1);
            hi1 = fmt_g(sys.Dhat.box_lo[1] + (g.grid.j_of(c) + 1) * w1);
        }
        const char* status = g.cells[c].status == CellStatus::ok          ? "ok"
                             : g.cells[c].status == CellStatus::no_return ? "no_return"
                             : g.cells[c].status == CellStatus::grazing   ? "grazing"
                             : g.cells[c].status == CellStatus::boundary  ? "boundary"
                                                                          : "domain_error";
        cells << c << ',' << fmt_g(lo0) << ',' << fmt_g(lo0 + w0) << ',' << lo1 << ',' << hi1
              << ',' << status << '\n';
    }
    edges << "from,to\n";
    for (int c = 0; c < g.grid.cells(); ++c)
        for (int d : g.edges[c]) edges << c << ',' << d << '\n';
    rec << "cell_id\n";
    std::vector<int> rc = chain_recurrent_cells(g);
    for (int c : rc) rec << c << '\n';
    ctx.emit("graph_cells.csv", cells.str());
    ctx.emit("graph_edges.csv", edges.str());
    ctx.emit("recurrent.csv", rec.str());
    if (ctx.sc.op.contains("box")) {
        const Json& b = ctx.sc.op.at("box");
        BoxCertificate cert =
            verify_box(sys, vec_from_json(b.at("center")), b.at("half_width").get<double>(),
                       b.value("order", 1), b.value("epsilon", 0.1));
        Json cj{{"center", vec_to_json(cert.center)},
                {"half_width", cert.half_width},
                {"order", cert.order},
                {"epsilon", cert.epsilon},
                {"disjoint", cert.disjoint},
                {"witness", Json::array({cert.witness_a, cert.witness_b})},
                {"note", cert.note}};
        ctx.emit("certificate.json", cj.dump(2) + "\n");
        ctx.summary << "box certificate: " << (cert.disjoint ? "disjoint" : "violated") << "\n";
    }
    if (ctx.sc.emit_plot_data) {
        std::ostringstream os;
        for (int c : rc) {
            Vec u = g.grid.center(c);
            Vec x = sys.Dhat.chart(u);
            os << fmt_g(x[0]);
            for (int i = 1; i < sys.field.dim; ++i) os << ',' << fmt_g(x[i]);
            os << '\n';
        }
        ctx.emit("recurrent_centers.csv", os.str());
    }
    ctx.summary << "chain: " << g.grid.cells() << " cells, " << rc.size() << " recurrent\n";
    return 0;
}

int op_omega(RunContext& ctx, const ImpulsiveSystem& sys) {
    std::vector<double> hs, ds;
    for (const Json& v : ctx.sc.op.at("h_seq")) hs.push_back(v.get<double>());
    for (const Json& v : ctx.sc.op.at("delta_seq")) ds.push_back(v.get<double>());
    OmegaReport rep = omega_estimate(sys, hs, ds);
    Json j;
    j["nested"] = rep.nested;
    Json scales = Json::array();
    for (const OmegaScale& sc : rep.scales) {
        Json s{{"h", sc.h}, {"delta", sc.delta}, {"recurrent_cells", sc.recurrent.size()}};
        Json centers = Json::array();
        for (const Vec& c : sc.centers) centers.push_back(vec_to_json(c));
        s["centers"] = centers;
        scales.push_back(s);
    }
    j["scales"] = scales;
    ctx.emit("omega.json", j.dump(2) + "\n");
    ctx.summary << "omega: " << rep.scales.size() << " scales, nested=" << rep.nested << "\n";
    return 0;
}

int op_close(RunContext& ctx, const ImpulsiveSystem& sys) {
    Vec x = vec_from_json(ctx.sc.op.at("x"));
    Vec y = vec_from_json(ctx.sc.op.at("y"));
    const double eps = ctx.sc.op.at("eps").get<double>();
    CloseOpts co;
    co.delta0 = ctx.sc.op.value("delta0", 1e-2);
    co.max_halvings = ctx.sc.op.value("max_halvings", 6);
    CloseResult r = close_orbit(sys, x, y, eps, co);
    Json j;
    j["ok"] = r.ok;
    j["failure"] = close_failure_name(r.failure);
    j["bump_count"] = r.bump_count;
    j["c1_cost"] = r.c1_cost;
    j["orbit_steps"] = r.orbit_steps;
    if (r.ok) j["impulse"] = impulse_to_json(r.impulse);
    ctx.emit("close.json", j.dump(2) + "\n");
    ctx.summary << "close: " << (r.ok ? "ok" : close_failure_name(r.failure)) << ", "
                << r.bump_count << " bumps, cost " << fmt_g(r.c1_cost) << "\n";
    return r.ok ? 0 : 2;
}

int op_density(RunContext& ctx, const ImpulsiveSystem& sys) {
    const double eps = ctx.sc.op.at("eps").get<double>();
    const double h = ctx.sc.op.value("h", 0.01);
    const double delta = ctx.sc.op.value("delta", 0.01);
    const int cap = ctx.sc.op.value("cap", 100000);
    DensityReport rep = density_experiment(sys, eps, h, delta, cap, ctx.sc.seed);
    Json j;
    j["recurrent_cells"] = rep.recurrent_cells;
    j["attempted"] = rep.attempted;
    j["successes"] = rep.successes;
    j["fraction"] = rep.fraction;
    Json cells = Json::array();
    for (const DensityCellRecord& c : rep.cells) {
        Json cj{{"cell_id", c.cell_id},
                {"status", c.success ? "success" : close_failure_name(c.failure)},
                {"bump_count", c.bump_count},
                {"c1_cost", c.c1_cost}};
        if (c.success) {
            cj["orbit_period"] = c.orbit_period;
            Json mults = Json::array();
            for (const auto& m : c.multipliers)
                mults.push_back(Json{{"re", m.real()}, {"im", m.imag()}});
            cj["multipliers"] = mults;
        }
        cells.push_back(cj);
    }
    j["cells"] = cells;
    ctx.emit("report.json", j.dump(2) + "\n");
    ctx.summary << "density: fraction " << fmt_g(rep.fraction) << " over " << rep.attempted
                << " cells\n";
    return 0;
}

int op_validate(RunContext& ctx, const ImpulsiveSystem& sys) {
    const ValidationReport& v = sys.validation;
    Json j{{"hausdorff_gap", v.hausdorff_gap},
           {"landing_transversal", v.landing_transversal},
           {"tau1_finite", v.tau1_finite},
           {"tau1_sup_bound", v.tau1_finite ? Json(v.tau1_sup_bound) : Json("inf")},
           {"verdict", v.verdict}};
    ctx.emit("validate.json", j.dump(2) + "\n");
    ctx.summary << "validate: verdict " << (v.verdict ? "true" : "false") << ", gap "
                << fmt_g(v.hausdorff_gap) << "\n";
    return 0;
}

int run_scenario(const fs::path& config_path) {
    Json j;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config: cannot open " << config_path << "\n";
            return 1;
        }
        try {
            in >> j;
        } catch (const std::exception& e) {
            std::cerr << "config: parse error in " << config_path.string() << ": " << e.what()
                      << "\n";
            return 1;
        }
    }
    Scenario sc;
    try {
        sc = parse_scenario(j);
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 1;
    }
    RunContext ctx;
    ctx.sc = sc;
    fs::path root = ".";
    if (const char* env = std::getenv("IMPDYN_OUTPUT_ROOT")) root = env;
    ctx.out = fs::path(sc.output_dir).is_absolute() ? fs::path(sc.output_dir)
                                                    : root / sc.output_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        ImpulsiveSystem sys = scenario_system(sc);
        if (sc.operation == "simulate") rc = op_simulate(ctx, sys);
        else if (sc.operation == "hitmap") rc = op_hitmap(ctx, sys);
        else if (sc.operation == "poincare") rc = op_poincare(ctx, sys);
        else if (sc.operation == "periodic") rc = op_periodic(ctx, sys);
        else if (sc.operation == "audit") rc = op_audit(ctx, sys);
        else if (sc.operation == "chain") rc = op_chain(ctx, sys);
        else if (sc.operation == "omega") rc = op_omega(ctx, sys);
        else if (sc.operation == "close") rc = op_close(ctx, sys);
        else if (sc.operation == "density") rc = op_density(ctx, sys);
        else if (sc.operation == "validate") rc = op_validate(ctx, sys);
    } catch (const ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 1;
    } catch (const UnknownExample& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 1;
    } catch (const BadParams& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "analysis: " << e.what() << "\n";
        return 2;
    }
    const auto wall =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count();
    // The manifest records the wall time, so it is the one output that is not
    // byte-reproducible across runs.
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a(sc.raw.dump())));
    Json manifest{{"config_hash", hash},
                  {"tool_version", kVersion},
                  {"wall_time_ms", wall},
                  {"outputs", ctx.outputs}};
    write_text(ctx.out / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "== " << sc.operation << " (" << (sc.example.empty() ? "inline" : sc.example)
              << ") -> " << ctx.out.string() << "\n"
              << ctx.summary.str();
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"impdyn: impulsive dynamics toolkit (flow + cross-section + impulse)"};
    app.set_version_flag("--version", kVersion);

    std::string config;
    CLI::App* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config, "scenario JSON file")->required();

    CLI::App* examples = app.add_subcommand("examples", "built-in example systems");
    CLI::App* list = examples->add_subcommand("list", "list example names and facts");
    std::string emit_name, emit_path = "-";
    CLI::App* emit = examples->add_subcommand("emit", "write the canonical scenario config");
    emit->add_option("name", emit_name, "example name")->required();
    emit->add_option("-o,--output", emit_path, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_scenario(config);
        if (*list) {
            for (const std::string& name : impdyn::example_names()) {
                auto facts = impdyn::expected_facts(name);
                std::cout << name << "\n";
                for (const auto& f : facts)
                    std::cout << "  " << f.name << " = " << impdyn::fmt_g(f.value) << "  ["
                              << impdyn::provenance_name(f.provenance) << "]"
                              << (f.note.empty() ? "" : "  " + f.note) << "\n";
            }
            return 0;
        }
        if (*emit) {
            impdyn::Json j = impdyn::scenario_template(emit_name);
            const std::string body = j.dump(2) + "\n";
            if (emit_path == "-")
                std::cout << body;
            else
                impdyn::write_text(emit_path, body);
            return 0;
        }
    } catch (const impdyn::UnknownExample& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << app.help();
    return 0;
}
