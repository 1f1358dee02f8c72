#include "billiards/suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "billiards/exact_billiard.hpp"
#include "billiards/trajectory.hpp"

namespace billiards {

namespace {

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

} // namespace

std::vector<NamedBody> standard_zoo() {
    std::vector<NamedBody> zoo;
    zoo.push_back({"disc", Body::make_ball(vec2(0, 0), 1.0)});
    zoo.push_back({"disc15", Body::make_ball(vec2(0, 0), 1.5)});
    zoo.push_back({"ellipse", Body::make_ellipsoid(vec2(0, 0), vec2(2, 1))});
    zoo.push_back(
        {"quartic", Body::make_pnorm_ball(vec2(0, 0), vec2(1.5, 1), 4)});
    zoo.push_back({"ellipse_plus_ball",
                   minkowski_sum(zoo[2].body, Body::make_ball(vec2(0, 0), 0.5))});
    return zoo;
}

std::vector<ZooPair> standard_pairs() {
    // disc + disc15 is the homothetic pair; its sum must achieve equality.
    return {{0, 1, true}, {0, 2, false}, {0, 3, false},
            {2, 3, false}, {1, 2, false}};
}

std::vector<NestedRelation> standard_nestings() {
    std::vector<NamedBody> zoo = standard_zoo();
    std::vector<NestedRelation> nestings = {{0, 1}, {0, 2}, {0, 3}, {2, 4}};
    // Containment is equivalent to support dominance; spot-check it on a
    // grid so a zoo edit cannot silently break the monotonicity criterion.
    for (const NestedRelation& nest : nestings) {
        const Body& inner = zoo[nest.inner].body;
        const Body& outer = zoo[nest.outer].body;
        double tol = 1e-9 * outer.length_scale();
        for (const Vector& v : direction_grid(inner.dim(), 256))
            if (inner.support(v) > outer.support(v) + tol)
                throw std::logic_error("standard_nestings: pair " +
                                       zoo[nest.inner].name + " in " +
                                       zoo[nest.outer].name +
                                       " is not nested");
    }
    return nestings;
}

namespace {

// Shared evidence passed between criteria: later criteria audit the
// continuations and estimates produced by earlier ones.
struct SuiteContext {
    std::vector<NamedBody> zoo;
    AcceptanceOptions opts;

    bool loop_ready = false;
    ContinuationTrace loop_trace;
    BilliardTrajectory loop_trajectory;

    bool chord_ready = false;
    ContinuationTrace chord_trace;
    BilliardTrajectory chord_trajectory;

    bool estimates_ready = false;
    std::vector<BodyEstimates> zoo_estimates;

    bool reports_ready = false;
    std::vector<InequalityReport> reports;
};

EstimateOptions zoo_estimate_options() {
    EstimateOptions est;
    est.penalty_nodes = 96;
    est.penalty_steps = 13;
    return est;
}

BodyEstimates estimate_body(const NamedBody& named,
                            const EstimateOptions& est) {
    BodyEstimates out;
    out.name = named.name;
    out.dim = named.body.dim();
    out.inradius_value = inradius(named.body).radius;
    out.width_value = width(named.body).width;
    out.periodic = shortest_periodic(named.body, est);
    return out;
}

const char* verdict_word(InequalityVerdict v) {
    switch (v) {
        case InequalityVerdict::holds: return "holds";
        case InequalityVerdict::fails: return "fails";
        case InequalityVerdict::equality: return "equality";
    }
    return "?";
}

// ---- criterion 1: disc shooting vs closed-form orbit lengths ------------

bool criterion_disc_orbits(SuiteContext& ctx, std::string& detail) {
    const Body& disc = ctx.zoo[0].body;
    double worst = 0;
    int orbit_count = 0;
    for (int k = 2; k <= 5; ++k) {
        for (int j = 1; 2 * j <= k; ++j) {
            if (std::gcd(j, k) != 1) continue;
            std::vector<double> seed(k);
            for (int i = 0; i < k; ++i)
                seed[i] = 2.0 * M_PI * j * i / k;
            ShootResult shot = shoot_periodic(disc, k, seed);
            double expected = disc_orbit_length(1.0, k, j);
            worst = std::max(worst, std::abs(shot.length - expected));
            ++orbit_count;
        }
    }
    detail = std::to_string(orbit_count) +
             " orbits, max |length - closed form| = " + format_double(worst);
    return worst <= 1e-8;
}

// ---- criterion 2: closed penalty continuation on the disc ---------------

bool criterion_loop_pipeline(SuiteContext& ctx, std::string& detail) {
    const Body& disc = ctx.zoo[0].body;
    std::vector<double> schedule =
        geometric_schedule(0.1, 0.5, ctx.opts.schedule_steps);
    PenaltyParams first = make_penalty_params(disc, schedule.front());
    DiscreteCurve seed = bounce_loop_seed(disc, width(disc).direction,
                                          ctx.opts.nodes, first);
    ctx.loop_trace = continue_to_zero(seed, disc, first.delta, schedule);
    std::vector<BounceEvent> bounces = detect_bounces(ctx.loop_trace, disc);
    ctx.loop_trajectory =
        assemble(ctx.loop_trace.final_record(), bounces, disc);
    ctx.loop_ready = true;

    ReflectionReport reflection =
        verify_reflection(ctx.loop_trajectory, disc, 1e-3);
    double len = ctx.loop_trajectory.total_length;
    detail = "length " + format_double(len) + ", " +
             std::to_string(bounces.size()) + " bounces, reflection residual " +
             format_double(reflection.max_residual);
    return std::abs(len - 4.0) <= 1e-2 && bounces.size() == 2 &&
           reflection.passed;
}

// ---- criterion 3: open (brake) continuation on the disc ------------------

bool criterion_brake_pipeline(SuiteContext& ctx, std::string& detail) {
    const Body& disc = ctx.zoo[0].body;
    std::vector<double> schedule =
        geometric_schedule(0.1, 0.5, ctx.opts.schedule_steps);
    PenaltyParams first = make_penalty_params(disc, schedule.front());
    DiscreteCurve seed =
        chord_seed(disc, width(disc).direction, ctx.opts.nodes, first);
    ctx.chord_trace = continue_to_zero(seed, disc, first.delta, schedule);
    std::vector<BounceEvent> bounces = detect_bounces(ctx.chord_trace, disc);
    ctx.chord_trajectory =
        assemble(ctx.chord_trace.final_record(), bounces, disc);
    ctx.chord_ready = true;

    ReflectionReport reflection =
        verify_reflection(ctx.chord_trajectory, disc, 1e-3);
    double len = ctx.chord_trajectory.total_length;
    double brake_cap = 2.0 * disc.dim() * inradius(disc).radius;
    double endpoint_residual =
        std::max(reflection.brake_start, reflection.brake_end);
    detail = "length " + format_double(len) + ", " +
             std::to_string(bounces.size()) +
             " interior bounces, endpoint residual " +
             format_double(endpoint_residual) + ", cap " +
             format_double(brake_cap);
    return ctx.chord_trajectory.kind == BilliardTrajectory::Kind::brake &&
           std::abs(len - 2.0) <= 1e-2 && bounces.empty() &&
           reflection.passed && len <= brake_cap + 1e-9;
}

// ---- criterion 4: inradius lower bound with equality witnesses ----------

bool criterion_lower_bound(SuiteContext& ctx, std::string& detail) {
    EstimateOptions est = zoo_estimate_options();
    ctx.zoo_estimates.clear();
    for (const NamedBody& named : ctx.zoo)
        ctx.zoo_estimates.push_back(estimate_body(named, est));
    ctx.estimates_ready = true;

    std::vector<InequalityReport> rows = check_inequalities(ctx.zoo_estimates);
    bool ok = true;
    double min_slack = std::numeric_limits<double>::infinity();
    std::ostringstream note;
    for (size_t i = 0; i < ctx.zoo_estimates.size(); ++i) {
        const BodyEstimates& e = ctx.zoo_estimates[i];
        auto row = std::find_if(rows.begin(), rows.end(),
                                [&](const InequalityReport& r) {
                                    return r.name == "periodic >= 4 inradius" &&
                                           r.subject == e.name;
                                });
        if (row == rows.end()) {
            ok = false;
            note << " " << e.name << ": missing report;";
            continue;
        }
        min_slack = std::min(min_slack, row->slack);
        if (row->slack < -1e-3 || row->verdict == InequalityVerdict::fails) {
            ok = false;
            note << " " << e.name << ": slack " << format_double(row->slack)
                 << ";";
        }
        bool round = std::abs(2.0 * e.inradius_value - e.width_value) <= 1e-4;
        bool is_equality = row->verdict == InequalityVerdict::equality;
        if (round != is_equality) {
            ok = false;
            note << " " << e.name << ": verdict " << verdict_word(row->verdict)
                 << " but |2r - wid| = "
                 << format_double(
                        std::abs(2.0 * e.inradius_value - e.width_value))
                 << ";";
        }
        if (is_equality &&
            e.periodic.trajectory.bounce_points.size() != 2) {
            ok = false;
            note << " " << e.name << ": equality witness has "
                 << e.periodic.trajectory.bounce_points.size()
                 << " bounces;";
        }
    }
    detail = std::to_string(ctx.zoo_estimates.size()) +
             " bodies, min slack " + format_double(min_slack) +
             (ok ? ", all equality witnesses are two-bounce orbits"
                 : "," + note.str());
    return ok;
}

// ---- criterion 5: Minkowski-sum superadditivity --------------------------

bool criterion_superadditivity(SuiteContext& ctx, std::string& detail) {
    if (!ctx.estimates_ready) {
        detail = "zoo estimates unavailable (criterion 4 failed)";
        return false;
    }
    // Sum bodies are estimated without the penalty corroboration: their
    // exact bouncing-ball orbits already carry the value, and penalized
    // solves over iterative sum projections dominate the runtime.
    EstimateOptions est = zoo_estimate_options();
    est.use_penalty = false;

    std::vector<BodyEstimates> all = ctx.zoo_estimates;
    std::vector<SumRelation> sums;
    for (const ZooPair& pair : standard_pairs()) {
        NamedBody named{
            ctx.zoo[pair.left].name + " + " + ctx.zoo[pair.right].name,
            minkowski_sum(ctx.zoo[pair.left].body, ctx.zoo[pair.right].body)};
        all.push_back(estimate_body(named, est));
        sums.push_back(
            {int(all.size()) - 1, pair.left, pair.right});
    }

    ctx.reports = check_inequalities(all, sums, standard_nestings());
    ctx.reports_ready = true;

    bool ok = true;
    double min_slack = std::numeric_limits<double>::infinity();
    std::ostringstream note;
    std::vector<ZooPair> pairs = standard_pairs();
    size_t pair_index = 0;
    for (const InequalityReport& row : ctx.reports) {
        if (row.name != "sum superadditivity") continue;
        const ZooPair& pair = pairs.at(pair_index++);
        min_slack = std::min(min_slack, row.slack);
        if (row.verdict == InequalityVerdict::fails || row.slack < -1e-3) {
            ok = false;
            note << " " << row.subject << ": slack "
                 << format_double(row.slack) << ";";
        }
        if (pair.homothetic_balls &&
            row.verdict != InequalityVerdict::equality) {
            ok = false;
            note << " " << row.subject << ": expected equality, got "
                 << verdict_word(row.verdict) << ";";
        }
    }
    if (pair_index != pairs.size()) {
        ok = false;
        note << " expected " << pairs.size() << " superadditivity rows, got "
             << pair_index << ";";
    }
    detail = std::to_string(pair_index) + " sums, min slack " +
             format_double(min_slack) +
             (ok ? ", homothetic pair at equality" : "," + note.str());
    return ok;
}

// ---- criterion 6: continuation convergence diagnostics -------------------

bool criterion_diagnostics(SuiteContext& ctx, std::string& detail) {
    if (!ctx.loop_ready || !ctx.chord_ready) {
        detail = "continuation traces unavailable (criteria 2/3 failed)";
        return false;
    }
    const Body& disc = ctx.zoo[0].body;
    bool ok = true;
    std::ostringstream note;
    double worst_ratio = 0;
    double worst_identity = 0;

    auto audit = [&](const char* label, const ContinuationTrace& trace,
                     size_t max_bounces) {
        const CriticalPointRecord& last = trace.final_record();
        double ratio = last.potential_integral /
                       std::max(last.energy_value, 1e-300);
        worst_ratio = std::max(worst_ratio, ratio);
        if (ratio > 1e-3) {
            ok = false;
            note << " " << label << ": potential/energy "
                 << format_double(ratio) << ";";
        }
        for (const ContinuationStep& step : trace.steps) {
            double gap = std::abs(step.record.energy_value -
                                  (step.record.lagrangian_value +
                                   2.0 * step.record.potential_integral));
            worst_identity = std::max(worst_identity, gap);
            if (gap > 1e-8) {
                ok = false;
                note << " " << label << ": energy identity off by "
                     << format_double(gap) << " at epsilon "
                     << format_double(step.record.epsilon) << ";";
                break;
            }
        }
        size_t bounce_count = detect_bounces(trace, disc).size();
        if (bounce_count > max_bounces) {
            ok = false;
            note << " " << label << ": " << bounce_count << " bounces;";
        }
    };
    // A planar trajectory carries at most dim + 1 = 3 bounces.
    audit("loop", ctx.loop_trace, 3);
    audit("chord", ctx.chord_trace, 3);

    detail = "max potential/energy " + format_double(worst_ratio) +
             ", max energy-identity gap " + format_double(worst_identity) +
             (ok ? "" : "," + note.str());
    return ok;
}

// ---- criterion 7: derivative correctness ---------------------------------

DiscreteCurve scaled_wiggle(const Body& body, int node_count,
                            std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    double p1 = phase(rng), p2 = phase(rng);
    InradiusReport core = inradius(body);
    DiscreteCurve c;
    c.closed = true;
    c.nodes.resize(node_count, body.dim());
    for (int i = 0; i < node_count; ++i) {
        double t = 2.0 * M_PI * i / node_count;
        double rho = core.radius * (0.55 + 0.25 * std::sin(2 * t + p1) +
                                    0.12 * std::cos(3 * t + p2));
        Vector q = core.center;
        q(0) += rho * std::cos(t);
        q(1) += rho * std::sin(t);
        c.nodes.row(i) = q.transpose();
    }
    return c;
}

bool criterion_derivatives(SuiteContext& ctx, std::string& detail) {
    const int N = 12;
    double worst_grad = 0, worst_hess = 0, worst_barrier = 0;

    for (size_t b = 0; b < ctx.zoo.size(); ++b) {
        const Body& body = ctx.zoo[b].body;
        PenaltyParams p = make_penalty_params(body, 0.05);
        double r = inradius(body).radius;
        Vector center = inradius(body).center;
        double h = 1e-6 * std::max(1.0, body.length_scale());
        std::mt19937_64 rng(12345 + 7 * b);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
        std::uniform_real_distribution<double> depth(0.05, 0.25);

        for (int trial = 0; trial < ctx.opts.derivative_trials; ++trial) {
            DiscreteCurve c = scaled_wiggle(body, N, rng);

            CurveTangent g = grad_lagrangian(c, body, p);
            double gscale = std::max(1.0, g.cwiseAbs().maxCoeff());
            for (int i = 0; i < N; ++i) {
                for (int d = 0; d < c.dim(); ++d) {
                    DiscreteCurve plus = c, minus = c;
                    plus.nodes(i, d) += h;
                    minus.nodes(i, d) -= h;
                    double fd = (lagrangian(plus, body, p) -
                                 lagrangian(minus, body, p)) /
                                (2.0 * h);
                    worst_grad = std::max(
                        worst_grad, std::abs(fd - g(i, d)) / gscale);
                }
            }

            // Differencing the gradient re-amplifies projection noise, so
            // the Hessian stencil is coarser than the value stencil.
            double hh = 1e-4 * std::max(1.0, body.length_scale());
            Matrix H = Matrix(hess_lagrangian(c, body, p));
            double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
            for (int i = 0; i < N; ++i) {
                for (int d = 0; d < c.dim(); ++d) {
                    DiscreteCurve plus = c, minus = c;
                    plus.nodes(i, d) += hh;
                    minus.nodes(i, d) -= hh;
                    Vector col = flatten(grad_lagrangian(plus, body, p) -
                                         grad_lagrangian(minus, body, p)) /
                                 (2.0 * hh);
                    worst_hess = std::max(
                        worst_hess,
                        (col - H.col(i * c.dim() + d)).cwiseAbs().maxCoeff() /
                            hscale);
                }
            }

            // Barrier gradient against differenced values at a collar point.
            Vector dir(body.dim());
            double a = angle(rng);
            dir << std::cos(a), std::sin(a);
            Vector q = ray_to_depth(body, center, dir, depth(rng) * r);
            Vector grad_u = barrier_gradient(body, p.delta, q);
            double uscale = std::max(1.0, grad_u.cwiseAbs().maxCoeff());
            for (int d = 0; d < body.dim(); ++d) {
                Vector qp = q, qm = q;
                qp(d) += h;
                qm(d) -= h;
                double fd = (barrier_value(body, p.delta, qp) -
                             barrier_value(body, p.delta, qm)) /
                            (2.0 * h);
                worst_barrier = std::max(
                    worst_barrier, std::abs(fd - grad_u(d)) / uscale);
            }
        }
    }

    detail = std::to_string(ctx.opts.derivative_trials) +
             " trials per body: gradient " + format_double(worst_grad) +
             ", hessian " + format_double(worst_hess) + ", barrier " +
             format_double(worst_barrier) + " (relative)";
    return worst_grad <= 1e-6 && worst_hess <= 1e-4 && worst_barrier <= 1e-6;
}

// ---- criterion 8: certificates and monotonicity ---------------------------

std::vector<Vector> bounce_normals_of(const std::vector<Vector>& points,
                                      const Body& body) {
    std::vector<Vector> normals;
    normals.reserve(points.size());
    for (const Vector& q : points) normals.push_back(body.boundary_normal(q));
    return normals;
}

bool criterion_certificates(SuiteContext& ctx, std::string& detail) {
    if (!ctx.estimates_ready || !ctx.reports_ready) {
        detail = "estimates or reports unavailable (criteria 4/5 failed)";
        return false;
    }
    bool ok = true;
    std::ostringstream note;
    int granted = 0;

    auto expect_certified = [&](const std::string& label,
                                const std::vector<Vector>& points,
                                const Body& body) {
        CertificateOutcome cert = support_touch_certificate(
            points, body, bounce_normals_of(points, body));
        if (!cert.granted) {
            ok = false;
            note << " " << label << ": " << cert.refusal << ";";
            return;
        }
        if (!untranslatable(points, body)) {
            ok = false;
            note << " " << label << ": certified polygon translates into the"
                 << " open body;";
            return;
        }
        ++granted;
    };

    // Estimate witnesses and every bouncing-ball orbit of each zoo body.
    for (size_t b = 0; b < ctx.zoo.size(); ++b) {
        const Body& body = ctx.zoo[b].body;
        const BodyEstimates& e = ctx.zoo_estimates[b];
        expect_certified(e.name + " witness",
                         e.periodic.trajectory.bounce_points, body);
        int index = 0;
        for (const DoubleNormalChord& chord : bouncing_ball_orbits(body)) {
            expect_certified(
                e.name + " chord " + std::to_string(index++),
                {chord.p, chord.q}, body);
        }
    }

    // Off-axis star orbits on the disc: certificates away from symmetry.
    const Body& disc = ctx.zoo[0].body;
    for (int k = 3; k <= 5; ++k) {
        std::vector<double> seed(k);
        for (int i = 0; i < k; ++i)
            seed[i] = 0.37 + 2.0 * M_PI * i / k;
        ShootResult shot = shoot_periodic(disc, k, seed);
        expect_certified("disc star k=" + std::to_string(k),
                         shot.polygon.points, disc);
    }

    int nested_rows = 0;
    for (const InequalityReport& row : ctx.reports) {
        if (row.name != "nested monotonicity") continue;
        ++nested_rows;
        if (row.verdict == InequalityVerdict::fails) {
            ok = false;
            note << " " << row.subject << ": monotonicity slack "
                 << format_double(row.slack) << ";";
        }
    }
    if (nested_rows != int(standard_nestings().size())) {
        ok = false;
        note << " expected " << standard_nestings().size()
             << " monotonicity rows, got " << nested_rows << ";";
    }

    detail = std::to_string(granted) + " certificates granted, " +
             std::to_string(nested_rows) + " nestings monotone" +
             (ok ? "" : "," + note.str());
    return ok;
}

} // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* progress,
                                            const AcceptanceOptions& opts,
                                            AcceptanceArtifacts* artifacts) {
    SuiteContext ctx;
    ctx.zoo = standard_zoo();
    ctx.opts = opts;

    struct Entry {
        const char* name;
        std::function<bool(SuiteContext&, std::string&)> run;
    };
    const std::vector<Entry> entries = {
        {"disc closed-form orbits", criterion_disc_orbits},
        {"penalty loop pipeline on the disc", criterion_loop_pipeline},
        {"brake pipeline on the disc", criterion_brake_pipeline},
        {"inradius lower bound with equality witnesses",
         criterion_lower_bound},
        {"Minkowski-sum superadditivity", criterion_superadditivity},
        {"continuation convergence diagnostics", criterion_diagnostics},
        {"derivative correctness", criterion_derivatives},
        {"certificates and monotonicity", criterion_certificates},
    };

    std::vector<CriterionResult> results;
    for (size_t i = 0; i < entries.size(); ++i) {
        CriterionResult r;
        r.index = int(i) + 1;
        r.name = entries[i].name;
        try {
            r.passed = entries[i].run(ctx, r.detail);
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = e.what();
        }
        if (progress)
            (*progress) << "criterion " << r.index << " "
                        << (r.passed ? "PASS" : "FAIL") << " " << r.name
                        << ": " << r.detail << "\n"
                        << std::flush;
        results.push_back(std::move(r));
    }

    if (artifacts) {
        if (ctx.reports_ready) artifacts->reports = std::move(ctx.reports);
        if (ctx.loop_ready) {
            artifacts->loop_trace = std::move(ctx.loop_trace);
            artifacts->loop_trajectory = std::move(ctx.loop_trajectory);
        }
        if (ctx.chord_ready) {
            artifacts->chord_trace = std::move(ctx.chord_trace);
            artifacts->chord_trajectory = std::move(ctx.chord_trajectory);
        }
    }
    return results;
}

} // namespace billiards
