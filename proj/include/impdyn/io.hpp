#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "impdyn/examples.hpp"

namespace impdyn {

using Json = nlohmann::ordered_json;

inline std::string fmt_g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << body;
}

// FNV-1a, stable across toolchains; used for config hashes in manifests.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline Json vec_to_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
    return a;
}

inline Vec vec_from_json(const Json& a) {
    if (!a.is_array() || a.size() < 1 || a.size() > kMaxDim)
        throw ConfigError("expected a numeric array of size 1..3");
    Vec v(int(a.size()));
    for (size_t i = 0; i < a.size(); ++i) v[int(i)] = a[i].get<double>();
    return v;
}

inline std::string trajectory_csv(const Trajectory& tr, int dim) {
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < dim; ++i) os << ",x" << i + 1;
    os << ",jump_flag\n";
    size_t next_jump = 0;
    for (const TrajectoryArc& arc : tr.arcs) {
        for (const auto& [t, p] : arc.samples) {
            const bool is_jump = next_jump < tr.jumps.size() &&
                                 std::abs(tr.jumps[next_jump].time - t) < 1e-12 &&
                                 t == arc.samples.back().first;
            os << fmt_g(t);
            for (int i = 0; i < dim; ++i) os << ',' << fmt_g(p[i]);
            os << ',' << (is_jump ? 1 : 0) << '\n';
        }
        if (next_jump < tr.jumps.size() &&
            std::abs(tr.jumps[next_jump].time - arc.t1) < 1e-12)
            ++next_jump;
    }
    return os.str();
}

inline std::string jumps_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "n,tau_n,pre_chart,post_chart\n";
    for (const TrajectoryJump& j : tr.jumps) {
        os << j.index << ',' << fmt_g(j.time) << ',' << format_vec(j.pre_chart) << ','
           << format_vec(j.post_chart) << '\n';
    }
    return os.str();
}

inline Json orbit_to_json(const PeriodicOrbit& orb) {
    Json j;
    Json pts = Json::array();
    for (const Vec& p : orb.points) pts.push_back(vec_to_json(p));
    j["points"] = pts;
    j["flight_times"] = orb.flight_times;
    j["period"] = orb.period;
    Json mults = Json::array();
    for (const auto& m : orb.multipliers) mults.push_back(Json{{"re", m.real()}, {"im", m.imag()}});
    j["multipliers"] = mults;
    j["tag"] = orbit_tag_name(orb.tag);
    return j;
}

// --- scenario configuration -----------------------------------------------

inline Json section_to_json(const CrossSection& s) {
    Json j;
    j["kind"] = section_kind_name(s.kind);
    j["name"] = s.name;
    j["box_lo"] = vec_to_json(s.box_lo);
    j["box_hi"] = vec_to_json(s.box_hi);
    j["boundary_margin"] = s.boundary_margin;
    if (s.kind == SectionKind::vertical_segment || s.kind == SectionKind::torus_circle)
        j["offset"] = s.c;
    if (s.kind == SectionKind::circle) j["radius"] = s.radius;
    return j;
}

inline Json impulse_to_json(const Impulse& im) {
    Json j;
    j["source"] = im.source;
    j["target"] = im.target;
    j["base"] = Json{{"kind", "affine"},
                     {"offset", vec_to_json(im.base_offset)},
                     {"scale", vec_to_json(im.base_scale)},
                     {"wrap0", im.wrap0}};
    Json bumps = Json::array();
    for (const Bump& b : im.bumps) {
        Json bj;
        bj["kind"] = b.kind == Bump::Kind::translate ? "translate" : "linear";
        bj["center"] = vec_to_json(b.center);
        bj["radius"] = b.radius;
        if (b.kind == Bump::Kind::translate) {
            bj["shift"] = vec_to_json(b.shift);
        } else {
            Json rows = Json::array();
            for (int r = 0; r < b.linear.rows; ++r) {
                Json row = Json::array();
                for (int c = 0; c < b.linear.cols; ++c) row.push_back(b.linear(r, c));
                rows.push_back(row);
            }
            bj["matrix"] = rows;
        }
        bumps.push_back(bj);
    }
    j["bumps"] = bumps;
    return j;
}

inline Impulse impulse_from_json(const Json& j) {
    const Json& base = j.at("base");
    Vec offset = vec_from_json(base.at("offset"));
    Vec scale = vec_from_json(base.at("scale"));
    Impulse im = make_affine_impulse(j.at("source").get<std::string>(),
                                     j.at("target").get<std::string>(), offset.n, offset, scale,
                                     base.value("wrap0", false));
    for (const Json& bj : j.value("bumps", Json::array())) {
        Bump b;
        const std::string kind = bj.at("kind").get<std::string>();
        b.kind = kind == "translate" ? Bump::Kind::translate : Bump::Kind::linear;
        b.center = vec_from_json(bj.at("center"));
        b.radius = bj.at("radius").get<double>();
        if (b.kind == Bump::Kind::translate) {
            b.shift = vec_from_json(bj.at("shift"));
        } else {
            const Json& rows = bj.at("matrix");
            b.linear = Mat(int(rows.size()), int(rows[0].size()));
            for (size_t r = 0; r < rows.size(); ++r)
                for (size_t c = 0; c < rows[r].size(); ++c)
                    b.linear(int(r), int(c)) = rows[r][c].get<double>();
        }
        im.bumps.push_back(b);
    }
    return im;
}

struct Scenario {
    std::string example;  // empty when the system is inline
    std::map<std::string, double> params;
    std::string operation;
    Json op;  // operation parameters
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
    bool emit_plot_data = false;
    bool allow_invalid = false;
    Json raw;
};

inline Scenario parse_scenario(const Json& j) {
    Scenario sc;
    sc.raw = j;
    if (j.contains("example")) sc.example = j.at("example").get<std::string>();
    if (j.contains("params"))
        for (auto& [k, v] : j.at("params").items()) sc.params[k] = v.get<double>();
    if (!j.contains("operation")) throw ConfigError("scenario misses \"operation\"");
    sc.operation = j.at("operation").get<std::string>();
    static const std::set<std::string> ops{"simulate", "hitmap", "poincare", "periodic", "audit",
                                           "chain",    "omega",  "close",    "density",  "validate"};
    if (!ops.count(sc.operation)) throw ConfigError("unknown operation '" + sc.operation + "'");
    sc.op = j.value("op", Json::object());
    sc.output_dir = j.value("output_dir", std::string("out"));
    sc.seed = j.value("seed", std::uint64_t(0));
    sc.threads = j.value("threads", 1);
    sc.emit_plot_data = j.value("emit_plot_data", false);
    sc.allow_invalid = j.value("allow_invalid", false);
    if (sc.example.empty() && !j.contains("system"))
        throw ConfigError("scenario needs either \"example\" or an inline \"system\"");
    return sc;
}

inline CrossSection section_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const std::string name = j.at("name").get<std::string>();
    Vec lo = vec_from_json(j.at("box_lo"));
    Vec hi = vec_from_json(j.at("box_hi"));
    const double margin = j.value("boundary_margin", 1e-3);
    if (kind == "axis_segment_pos") return section_axis_segment(true, lo[0], hi[0], margin, name);
    if (kind == "axis_segment_neg") return section_axis_segment(false, lo[0], hi[0], margin, name);
    if (kind == "vertical_segment")
        return section_vertical_segment(j.at("offset").get<double>(), lo[0], hi[0], margin, name);
    if (kind == "circle") return section_circle(j.at("radius").get<double>(), name);
    if (kind == "torus_circle") return section_torus_circle(j.at("offset").get<double>(), name);
    if (kind == "billiard_arc")
        return section_billiard_arc(lo[0], hi[0], hi[1], margin, name);
    throw ConfigError("unsupported inline section kind '" + kind + "'");
}

inline ImpulsiveSystem scenario_system(const Scenario& sc) {
    if (!sc.example.empty()) {
        if (sc.example == "lorenz_skew_interchanged") return make_lorenz_interchanged(sc.params);
        ExampleSpec ex = make_example(sc.example, sc.params);
        return make_impulsive_system(ex.field, ex.D, ex.Dhat, ex.impulse, ex.opts,
                                     sc.allow_invalid || !ex.valid);
    }
    const Json& s = sc.raw.at("system");
    std::map<std::string, double> fparams;
    if (s.at("field").contains("params"))
        for (auto& [k, v] : s.at("field").at("params").items()) fparams[k] = v.get<double>();
    const std::string kind_name = s.at("field").at("kind").get<std::string>();
    FieldKind kind;
    if (kind_name == "annulus_rotation") kind = FieldKind::annulus_rotation;
    else if (kind_name == "predator_prey") kind = FieldKind::predator_prey;
    else if (kind_name == "radial_disk") kind = FieldKind::radial_disk;
    else if (kind_name == "torus_linear") kind = FieldKind::torus_linear;
    else if (kind_name == "disk_billiard") kind = FieldKind::disk_billiard;
    else if (kind_name == "lorenz_skew") kind = FieldKind::lorenz_skew;
    else throw ConfigError("unknown field kind '" + kind_name + "'");
    SystemField field = make_field(kind, fparams);
    CrossSection D = section_from_json(s.at("D"));
    CrossSection Dhat = section_from_json(s.at("Dhat"));
    Impulse im = impulse_from_json(s.at("impulse"));
    SemiflowOpts opts;
    if (s.contains("integrator_step")) opts.integrator.step = s.at("integrator_step").get<double>();
    return make_impulsive_system(field, D, Dhat, im, opts, sc.allow_invalid);
}

inline Json scenario_template(const std::string& example) {
    ExampleSpec ex = make_example(example);
    Json j;
    j["example"] = example;
    j["params"] = Json::object();
    j["operation"] = "simulate";
    Json op;
    if (example == "annulus") {
        op["x0"] = Json::array({-1.0, 0.0});
        op["T"] = 10.0;
    } else if (example == "predator_prey") {
        op["x0"] = Json::array({0.5, 0.0});
        op["T"] = 2.0;
    } else if (example == "radial_disk") {
        op["x0"] = Json::array({1.5, 0.0});
        op["T"] = 2.0;
    } else if (example == "torus_linear") {
        op["x0"] = Json::array({1.0, 0.0});
        op["T"] = 20.0;
    } else if (example == "disk_billiard") {
        op["x0"] = Json::array({1.9707963267948966, 0.7853981633974483, 0.0});
        op["T"] = 10.0;
    } else {
        op["x0"] = Json::array({0.5, 0.25, 0.0});
        op["T"] = 10.0;
    }
    j["op"] = op;
    j["output_dir"] = "out";
    j["seed"] = 0;
    return j;
}

}  // namespace impdyn
