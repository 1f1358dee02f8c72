// Command-line driver: continuation pipelines, exact orbit solvers,
// inequality tables and the acceptance suite, with JSON/CSV/SVG artifacts.
//
// Exit codes: 0 all requested checks pass, 1 a check failed, 2 bad
// configuration or missing inputs, 3 a solver failed (diagnostics written).
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "billiards/serialize.hpp"
#include "billiards/suite.hpp"

using namespace billiards;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string body_spec;
    std::string out_dir = ".";
    std::string schedule_spec = "0.1:0.5:13";
    int nodes = 256;
    long long seed = 0;
    bool svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_body) {
    if (needs_body)
        cmd->add_option("--body", o.body_spec,
                        "zoo body name or JSON body file")
            ->required();
    cmd->add_option("--out", o.out_dir, "artifact directory")
        ->capture_default_str();
    cmd->add_option("--eps-schedule", o.schedule_spec,
                    "penalty schedule start:ratio:steps")
        ->capture_default_str();
    cmd->add_option("--nodes", o.nodes, "continuation node count")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "run seed, recorded in every artifact")
        ->capture_default_str();
    cmd->add_flag("--svg", o.svg, "also write an SVG plot (planar bodies)");
}

NamedBody resolve_body(const std::string& spec) {
    for (NamedBody& named : standard_zoo())
        if (named.name == spec) return named;
    fs::path path(spec);
    if (!fs::exists(path))
        throw ConfigError("body '" + spec +
                          "' is neither a zoo body nor an existing file");
    std::ifstream in(path);
    json j;
    in >> j;
    return {path.stem().string(), body_from_json(j)};
}

std::vector<double> parse_schedule(const std::string& spec) {
    double start = 0, ratio = 0;
    int steps = 0;
    char trailing = 0;
    int got = std::sscanf(spec.c_str(), "%lf:%lf:%d%c", &start, &ratio,
                          &steps, &trailing);
    if (got != 3)
        throw ConfigError("--eps-schedule must have the form start:ratio:steps");
    if (!(start > 0) || !(ratio > 0) || !(ratio < 1))
        throw ConfigError(
            "--eps-schedule must strictly decrease: start > 0, 0 < ratio < 1");
    if (steps < 1) throw ConfigError("--eps-schedule is empty");
    return geometric_schedule(start, ratio, steps);
}

json config_json(const std::string& mode, const CommonOpts& o) {
    json j;
    j["mode"] = mode;
    j["seed"] = o.seed;
    j["out"] = o.out_dir;
    if (!o.body_spec.empty()) j["body"] = o.body_spec;
    j["eps_schedule"] = o.schedule_spec;
    j["nodes"] = o.nodes;
    return j;
}

void write_text(const std::string& dir, const std::string& name,
                const std::string& text) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    out << text;
    if (text.empty() || text.back() != '\n') out << "\n";
}

void write_json_file(const std::string& dir, const std::string& name,
                     const json& j) {
    write_text(dir, name, j.dump(2));
}

std::string num(double x) { return json(x).dump(); }

// ---- solve / brake -------------------------------------------------------

int run_continuation(const CommonOpts& o, bool closed) {
    const std::string mode = closed ? "solve" : "brake";
    NamedBody named = resolve_body(o.body_spec);
    std::vector<double> schedule = parse_schedule(o.schedule_spec);
    PenaltyParams first = make_penalty_params(named.body, schedule.front());
    Vector direction = width(named.body).direction;
    DiscreteCurve seed =
        closed ? bounce_loop_seed(named.body, direction, o.nodes, first)
               : chord_seed(named.body, direction, o.nodes, first);

    json out = config_json(mode, o);
    try {
        ContinuationTrace trace =
            continue_to_zero(seed, named.body, first.delta, schedule);
        std::vector<BounceEvent> bounces = detect_bounces(trace, named.body);
        BilliardTrajectory traj =
            assemble(trace.final_record(), bounces, named.body);
        ReflectionReport reflection =
            verify_reflection(traj, named.body, 1e-3);

        bool ok = reflection.passed;
        out["trace"] = trace_to_json(trace);
        out["trajectory"] = trajectory_to_json(traj);
        out["reflection"] = reflection_to_json(reflection);
        if (!closed) {
            double cap = 2.0 * named.body.dim() * inradius(named.body).radius;
            out["brake_length_cap"] = cap;
            ok = ok && traj.total_length <= cap + 1e-9;
        }
        out["passed"] = ok;
        write_json_file(o.out_dir, mode + "_" + named.name + ".json", out);
        if (o.svg && named.body.dim() == 2)
            write_text(o.out_dir, mode + "_" + named.name + ".svg",
                       trajectory_svg(named.body, &traj));
        std::cout << mode << " " << named.name << ": length "
                  << num(traj.total_length) << ", " << bounces.size()
                  << (closed ? " bounces" : " interior bounces")
                  << ", reflection residual "
                  << num(reflection.max_residual) << ", "
                  << (ok ? "pass" : "FAIL") << "\n";
        return ok ? kOk : kCheckFailure;
    } catch (const Error& e) {
        out["error"] = e.what();
        write_json_file(o.out_dir, mode + "_" + named.name + ".diagnostics.json",
                        out);
        std::cerr << mode << " " << named.name << ": solver failure: "
                  << e.what() << "\n";
        return kSolverFailure;
    }
}

// ---- shoot ----------------------------------------------------------------

int run_shoot(const CommonOpts& o, int bounces, int winding, double phase) {
    NamedBody named = resolve_body(o.body_spec);
    if (named.body.dim() != 2)
        throw ConfigError("shoot: planar bodies only");
    if (bounces < 2) throw ConfigError("shoot: need at least 2 bounces");
    if (winding < 1 || 2 * winding > bounces)
        throw ConfigError("shoot: winding must satisfy 1 <= j, 2j <= k");

    json out = config_json("shoot", o);
    out["bounces"] = bounces;
    out["winding"] = winding;
    out["phase"] = phase;
    try {
        std::vector<double> seed(bounces);
        for (int i = 0; i < bounces; ++i)
            seed[i] = phase + 2.0 * M_PI * winding * i / bounces;
        ShootResult shot = shoot_periodic(named.body, bounces, seed);
        BilliardTrajectory traj = polygon_trajectory(shot.polygon);
        ReflectionReport reflection =
            verify_reflection(traj, named.body, 1e-6);

        out["shoot"] = shoot_to_json(shot);
        out["trajectory"] = trajectory_to_json(traj);
        out["reflection"] = reflection_to_json(reflection);
        out["passed"] = reflection.passed;
        write_json_file(o.out_dir, "shoot_" + named.name + ".json", out);
        if (o.svg)
            write_text(o.out_dir, "shoot_" + named.name + ".svg",
                       trajectory_svg(named.body, &traj));
        std::cout << "shoot " << named.name << ": k=" << bounces
                  << " j=" << winding << ", length " << num(shot.length)
                  << ", max residual "
                  << num(shot.residuals.cwiseAbs().maxCoeff()) << ", "
                  << (reflection.passed ? "pass" : "FAIL") << "\n";
        return reflection.passed ? kOk : kCheckFailure;
    } catch (const Error& e) {
        out["error"] = e.what();
        write_json_file(o.out_dir, "shoot_" + named.name + ".diagnostics.json",
                        out);
        std::cerr << "shoot " << named.name << ": solver failure: "
                  << e.what() << "\n";
        return kSolverFailure;
    }
}

// ---- verify ----------------------------------------------------------------

int run_verify(const CommonOpts& o, const std::string& in_file, double tol) {
    if (!fs::exists(in_file))
        throw ConfigError("verify: no such artifact " + in_file);
    std::ifstream in(in_file);
    json j;
    in >> j;
    // Prefer an explicit --body; otherwise the artifact names the body it
    // was produced with.
    std::string spec =
        !o.body_spec.empty() ? o.body_spec : j.value("body", std::string());
    if (spec.empty())
        throw ConfigError(
            "verify: artifact names no body; pass --body explicitly");
    NamedBody named = resolve_body(spec);
    BilliardTrajectory traj =
        trajectory_from_json(j.contains("trajectory") ? j.at("trajectory") : j);
    ReflectionReport reflection = verify_reflection(traj, named.body, tol);

    json out = config_json("verify", o);
    out["input"] = in_file;
    out["tol"] = tol;
    out["reflection"] = reflection_to_json(reflection);
    out["passed"] = reflection.passed;
    write_json_file(o.out_dir, "verify_" + named.name + ".json", out);
    std::cout << "verify " << named.name << ": max residual "
              << num(reflection.max_residual) << " vs tol " << num(tol)
              << ", " << (reflection.passed ? "pass" : "FAIL") << "\n";
    return reflection.passed ? kOk : kCheckFailure;
}

// ---- inequalities -----------------------------------------------------------

BodyEstimates estimate_named(const NamedBody& named,
                             const EstimateOptions& est) {
    BodyEstimates out;
    out.name = named.name;
    out.dim = named.body.dim();
    out.inradius_value = inradius(named.body).radius;
    out.width_value = width(named.body).width;
    out.periodic = shortest_periodic(named.body, est);
    out.brake_length = shortest_brake(named.body, est).length;
    return out;
}

int run_inequalities(const CommonOpts& o, bool no_penalty) {
    EstimateOptions est;
    est.penalty_nodes = 96;
    est.penalty_steps = 13;
    est.use_penalty = !no_penalty;

    std::vector<NamedBody> all = standard_zoo();
    std::vector<SumRelation> sums;
    for (const ZooPair& pair : standard_pairs()) {
        all.push_back({all[pair.left].name + " + " + all[pair.right].name,
                       minkowski_sum(all[pair.left].body,
                                     all[pair.right].body)});
        sums.push_back({int(all.size()) - 1, pair.left, pair.right});
    }

    json out = config_json("inequalities", o);
    try {
        // Independent bodies on a worker pool; merge preserves index order.
        std::vector<std::future<BodyEstimates>> workers;
        workers.reserve(all.size());
        for (const NamedBody& named : all)
            workers.push_back(std::async(std::launch::async, [&named, est] {
                return estimate_named(named, est);
            }));
        std::vector<BodyEstimates> estimates;
        estimates.reserve(all.size());
        for (std::future<BodyEstimates>& w : workers)
            estimates.push_back(w.get());

        std::vector<InequalityReport> reports =
            check_inequalities(estimates, sums, standard_nestings());

        int fails = 0;
        json rows = json::array();
        for (const InequalityReport& r : reports) {
            rows.push_back(inequality_to_json(r));
            if (r.verdict == InequalityVerdict::fails) ++fails;
        }
        out["reports"] = rows;
        out["failed"] = fails;
        write_json_file(o.out_dir, "inequalities.json", out);
        write_text(o.out_dir, "inequalities.csv", inequality_csv(reports));
        std::cout << "inequalities: " << reports.size() << " rows, " << fails
                  << " failed (" << (fails == 0 ? "pass" : "FAIL") << ")\n";
        return fails == 0 ? kOk : kCheckFailure;
    } catch (const Error& e) {
        out["error"] = e.what();
        write_json_file(o.out_dir, "inequalities.diagnostics.json", out);
        std::cerr << "inequalities: solver failure: " << e.what() << "\n";
        return kSolverFailure;
    }
}

// ---- geom -------------------------------------------------------------------

int run_geom(const CommonOpts& o) {
    NamedBody named = resolve_body(o.body_spec);
    InradiusReport core = inradius(named.body);
    SlabReport slab = width(named.body);

    json out = config_json("geom", o);
    out["dim"] = named.body.dim();
    out["length_scale"] = named.body.length_scale();
    json center = json::array();
    for (int i = 0; i < core.center.size(); ++i) center.push_back(core.center(i));
    out["inradius"] = {{"center", center}, {"radius", core.radius}};
    json dir = json::array();
    for (int i = 0; i < slab.direction.size(); ++i)
        dir.push_back(slab.direction(i));
    out["width"] = {{"direction", dir},
                    {"width", slab.width},
                    {"support_pos", slab.support_pos},
                    {"support_neg", slab.support_neg}};
    json chords = json::array();
    for (const DoubleNormalChord& chord : bouncing_ball_orbits(named.body)) {
        json c;
        json p = json::array(), q = json::array();
        for (int i = 0; i < chord.p.size(); ++i) p.push_back(chord.p(i));
        for (int i = 0; i < chord.q.size(); ++i) q.push_back(chord.q(i));
        c["p"] = p;
        c["q"] = q;
        c["chord"] = chord.chord;
        c["orbit_length"] = chord.length;
        chords.push_back(c);
    }
    out["double_normal_chords"] = chords;
    write_json_file(o.out_dir, "geom_" + named.name + ".json", out);
    if (o.svg && named.body.dim() == 2)
        write_text(o.out_dir, "geom_" + named.name + ".svg",
                   trajectory_svg(named.body));
    std::cout << "geom " << named.name << ": inradius " << num(core.radius)
              << ", width " << num(slab.width) << ", "
              << chords.size() << " double-normal chords\n";
    return kOk;
}

// ---- report -----------------------------------------------------------------

json load_json(const fs::path& path) {
    std::ifstream in(path);
    json j;
    in >> j;
    return j;
}

void summarize_artifact(const fs::path& path, const json& j, int& shown);

int run_report(const std::string& dir) {
    if (!fs::exists(dir))
        throw IncompleteReport("report: no artifact directory " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw IncompleteReport("report: no artifacts in " + dir);

    int shown = 0;
    for (const fs::path& path : files) {
        json j;
        try {
            j = load_json(path);
            summarize_artifact(path, j, shown);
        } catch (const json::exception& e) {
            // Foreign or partial JSON must not sink the rest of the report.
            std::cout << path.filename().string() << ": unreadable ("
                      << e.what() << ")\n";
        }
    }
    if (shown == 0)
        throw IncompleteReport("report: no readable artifacts in " + dir);
    return kOk;
}

void summarize_artifact(const fs::path& path, const json& j, int& shown) {
    const std::string mode = j.value("mode", "");
    if (mode == "solve" || mode == "brake" || mode == "shoot") {
        const json& traj = j.at("trajectory");
        std::cout << path.filename().string() << ": " << mode << " "
                  << j.value("body", "?") << ", length "
                  << num(traj.at("total_length").get<double>())
                  << ", bounces " << traj.at("bounce_times").size()
                  << ", reflection residual "
                  << num(j.at("reflection").at("max_residual")
                             .get<double>())
                  << ", " << (j.value("passed", false) ? "pass" : "FAIL")
                  << "\n";
        ++shown;
    } else if (mode == "verify") {
        std::cout << path.filename().string() << ": verify "
                  << j.value("body", "?") << " vs " << j.value("input", "?")
                  << ", " << (j.value("passed", false) ? "pass" : "FAIL")
                  << "\n";
        ++shown;
    } else if (mode == "geom") {
        std::cout << path.filename().string() << ": geom "
                  << j.value("body", "?") << ", inradius "
                  << num(j.at("inradius").at("radius").get<double>())
                  << ", width "
                  << num(j.at("width").at("width").get<double>()) << "\n";
        ++shown;
    } else if (mode == "inequalities") {
        int fails = j.value("failed", -1);
        std::cout << path.filename().string() << ": inequalities, "
                  << j.at("reports").size() << " rows, " << fails
                  << " failed\n";
        for (const json& row : j.at("reports"))
            std::cout << "  " << row.at("name").get<std::string>() << " ["
                      << row.at("subject").get<std::string>() << "]: "
                      << num(row.at("lhs").get<double>()) << " vs "
                      << num(row.at("rhs").get<double>()) << ", slack "
                      << num(row.at("slack").get<double>()) << ", "
                      << row.at("verdict").get<std::string>() << "\n";
        ++shown;
    } else if (mode == "suite") {
        std::cout << path.filename().string() << ": acceptance suite\n";
        for (const json& row : j.at("criteria"))
            std::cout << "  criterion " << row.at("index").get<int>()
                      << " " << (row.at("passed").get<bool>() ? "PASS"
                                                              : "FAIL")
                      << " " << row.at("name").get<std::string>() << "\n";
        ++shown;
    }
}

// ---- acceptance suite --------------------------------------------------------

int run_suite(const CommonOpts& o) {
    AcceptanceArtifacts artifacts;
    std::vector<CriterionResult> results =
        run_acceptance(&std::cout, {}, &artifacts);

    json out = config_json("suite", o);
    out["suite"] = "acceptance";
    json rows = json::array();
    bool all_passed = true;
    for (const CriterionResult& r : results) {
        rows.push_back({{"index", r.index},
                        {"name", r.name},
                        {"passed", r.passed},
                        {"detail", r.detail}});
        all_passed = all_passed && r.passed;
    }
    out["criteria"] = rows;
    out["passed"] = all_passed;
    write_json_file(o.out_dir, "acceptance.json", out);

    if (!artifacts.reports.empty())
        write_text(o.out_dir, "inequalities.csv",
                   inequality_csv(artifacts.reports));
    const std::vector<NamedBody> zoo = standard_zoo();
    const Body& disc = zoo[0].body;
    auto write_run = [&](const std::string& mode, const ContinuationTrace& tr,
                         const BilliardTrajectory& traj,
                         const std::string& stem) {
        json j = config_json(mode, o);
        j["body"] = "disc";
        j["trace"] = trace_to_json(tr);
        j["trajectory"] = trajectory_to_json(traj);
        ReflectionReport reflection = verify_reflection(traj, disc, 1e-3);
        j["reflection"] = reflection_to_json(reflection);
        j["passed"] = reflection.passed;
        write_json_file(o.out_dir, stem + ".json", j);
        if (o.svg)
            write_text(o.out_dir, stem + ".svg", trajectory_svg(disc, &traj));
    };
    if (artifacts.loop_trace)
        write_run("solve", *artifacts.loop_trace, *artifacts.loop_trajectory,
                  "acceptance_loop");
    if (artifacts.chord_trace)
        write_run("brake", *artifacts.chord_trace,
                  *artifacts.chord_trajectory, "acceptance_chord");
    return all_passed ? kOk : kCheckFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"convex billiard laboratory: penalty continuations, exact "
                 "orbits, inequality tables"};
    app.require_subcommand(0, 1);

    std::string suite_name;
    CommonOpts top;
    app.add_option("--suite", suite_name,
                   "run a named suite (acceptance) and write its artifacts");
    app.add_option("--out", top.out_dir, "artifact directory")
        ->capture_default_str();
    app.add_option("--seed", top.seed, "run seed, recorded in every artifact")
        ->capture_default_str();
    app.add_flag("--svg", top.svg, "also write SVG plots");

    CommonOpts solve_opts;
    CLI::App* solve = app.add_subcommand(
        "solve", "closed-loop penalty continuation to a periodic trajectory");
    add_common(solve, solve_opts, true);

    CommonOpts brake_opts;
    CLI::App* brake = app.add_subcommand(
        "brake", "open-curve penalty continuation to a brake trajectory");
    add_common(brake, brake_opts, true);

    CommonOpts shoot_opts;
    int shoot_bounces = 3, shoot_winding = 1;
    double shoot_phase = 0.0;
    CLI::App* shoot =
        app.add_subcommand("shoot", "planar periodic-orbit shooting");
    add_common(shoot, shoot_opts, true);
    shoot->add_option("--bounces,-k", shoot_bounces, "bounce count k")
        ->capture_default_str();
    shoot->add_option("--winding,-j", shoot_winding, "winding number j")
        ->capture_default_str();
    shoot->add_option("--phase", shoot_phase, "seed rotation in radians")
        ->capture_default_str();

    CommonOpts verify_opts;
    std::string verify_in;
    double verify_tol = 1e-6;
    CLI::App* verify = app.add_subcommand(
        "verify", "re-check the reflection law of a stored trajectory");
    add_common(verify, verify_opts, false);
    verify->add_option("--body", verify_opts.body_spec,
                       "body override; defaults to the artifact's body");
    verify->add_option("--in", verify_in, "trajectory artifact to check")
        ->required();
    verify->add_option("--tol", verify_tol, "reflection tolerance")
        ->capture_default_str();

    CommonOpts ineq_opts;
    bool no_penalty = false;
    CLI::App* ineq = app.add_subcommand(
        "inequalities",
        "estimate the zoo, its Minkowski sums and nestings; check the tables");
    add_common(ineq, ineq_opts, false);
    ineq->add_flag("--no-penalty", no_penalty,
                   "skip the penalty corroboration (exact solvers only)");

    CommonOpts geom_opts;
    CLI::App* geom = app.add_subcommand(
        "geom", "geometry report: inradius, width, double-normal chords");
    add_common(geom, geom_opts, true);

    std::string report_dir = ".";
    CLI::App* report =
        app.add_subcommand("report", "summarize the artifacts in a directory");
    report->add_option("--out", report_dir, "artifact directory to read")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (!suite_name.empty()) {
            if (!app.get_subcommands().empty())
                throw ConfigError("--suite excludes subcommands");
            if (suite_name != "acceptance")
                throw ConfigError("unknown suite '" + suite_name + "'");
            return run_suite(top);
        }
        if (solve->parsed()) return run_continuation(solve_opts, true);
        if (brake->parsed()) return run_continuation(brake_opts, false);
        if (shoot->parsed())
            return run_shoot(shoot_opts, shoot_bounces, shoot_winding,
                             shoot_phase);
        if (verify->parsed())
            return run_verify(verify_opts, verify_in, verify_tol);
        if (ineq->parsed()) return run_inequalities(ineq_opts, no_penalty);
        if (geom->parsed()) return run_geom(geom_opts);
        if (report->parsed()) return run_report(report_dir);
        std::cout << app.help();
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IncompleteReport& e) {
        std::cerr << "incomplete report: " << e.what() << "\n";
        return kConfigError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
