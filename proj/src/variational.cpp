#include "billiards/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "billiards/small_lp.hpp"

namespace billiards {

namespace {

std::vector<Vector> curve_points(const DiscreteCurve& curve) {
    std::vector<Vector> pts;
    pts.reserve(curve.node_count());
    for (int i = 0; i < curve.node_count(); ++i) pts.push_back(curve.node(i));
    return pts;
}

double polyline_length(const BilliardTrajectory& traj) {
    double total = 0;
    for (const auto& seg : traj.segments) total += (seg.end - seg.start).norm();
    return total;
}

// Convex combination of a normal subset summing closest to zero: solve the
// equality-constrained least squares (KKT system) for weights on the subset,
// then clip tiny negative weights. Returns the residual norm, or infinity
// when the weights are genuinely negative.
double subset_witness(const std::vector<Vector>& normals,
                      const std::vector<int>& subset, Vector& weights) {
    const int s = static_cast<int>(subset.size());
    const int n = static_cast<int>(normals.front().size());
    Matrix A(n, s);
    for (int c = 0; c < s; ++c) A.col(c) = normals[subset[c]];
    Matrix kkt = Matrix::Zero(s + 1, s + 1);
    kkt.topLeftCorner(s, s) = A.transpose() * A;
    kkt.topRightCorner(s, 1).setOnes();
    kkt.bottomLeftCorner(1, s).setOnes();
    Vector rhs = Vector::Zero(s + 1);
    rhs(s) = 1.0;
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    Vector sol = lu.solve(rhs);
    Vector w = sol.head(s);
    if (w.minCoeff() < -1e-12) return std::numeric_limits<double>::infinity();
    w = w.cwiseMax(0.0);
    double total = w.sum();
    if (total <= 0) return std::numeric_limits<double>::infinity();
    w /= total;
    weights = w;
    return (A * w).norm();
}

// All size-s index subsets of {0..m-1}, streamed to the visitor.
template <class F>
void for_each_subset(int m, int s, F&& visit) {
    std::vector<int> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        visit(idx);
        int k = s - 1;
        while (k >= 0 && idx[k] == m - s + k) --k;
        if (k < 0) return;
        ++idx[k];
        for (int j = k + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
}

Vector centroid_of(const std::vector<Vector>& pts) {
    Vector c = Vector::Zero(pts.front().size());
    for (const auto& p : pts) c += p;
    return c / static_cast<double>(pts.size());
}

double cyclic_perimeter(const std::vector<Vector>& pts) {
    double total = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        total += (pts[(i + 1) % pts.size()] - pts[i]).norm();
    return total;
}

BilliardTrajectory chord_brake_trajectory(const DoubleNormalChord& chord) {
    BilliardTrajectory traj;
    traj.kind = BilliardTrajectory::Kind::brake;
    TrajectorySegment seg;
    seg.start = chord.p;
    seg.end = chord.q;
    seg.direction = (chord.q - chord.p).normalized();
    traj.segments.push_back(seg);
    traj.speed = chord.chord;
    traj.total_length = chord.chord;
    return traj;
}

struct Candidate {
    double length = std::numeric_limits<double>::infinity();
    BilliardTrajectory trajectory;
    std::string method;
};

// Penalty fold directions: the width direction plus the coordinate axes,
// deduplicated up to sign.
std::vector<Vector> fold_directions(const Body& body) {
    std::vector<Vector> dirs;
    dirs.push_back(width(body).direction);
    for (int i = 0; i < body.dim(); ++i) {
        Vector e = Vector::Zero(body.dim());
        e(i) = 1.0;
        bool dup = false;
        for (const auto& d : dirs)
            if (std::abs(d.dot(e)) > 1.0 - 1e-9) dup = true;
        if (!dup) dirs.push_back(e);
    }
    return dirs;
}

} // namespace

double curve_support(const std::vector<Vector>& points,
                     const Vector& direction) {
    if (points.empty())
        throw std::invalid_argument("curve_support: empty point set");
    if (direction.norm() == 0)
        throw std::invalid_argument("curve_support: zero direction");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) best = std::max(best, p.dot(direction));
    return best;
}

double curve_support(const DiscreteCurve& curve, const Vector& direction) {
    return curve_support(curve_points(curve), direction);
}

double curve_support(const BouncePolygon& polygon, const Vector& direction) {
    return curve_support(polygon.points, direction);
}

CertificateOutcome support_touch_certificate(const std::vector<Vector>& points,
                                             const Body& body,
                                             const std::vector<Vector>& normals,
                                             double tol) {
    CertificateOutcome out;
    if (normals.empty()) {
        out.refusal = "no candidate directions";
        return out;
    }
    const double slack_tol = tol * std::max(1.0, body.length_scale());
    std::vector<double> slacks;
    for (size_t i = 0; i < normals.size(); ++i) {
        if (normals[i].norm() == 0)
            throw std::invalid_argument("support_touch_certificate: zero direction");
        double slack =
            curve_support(points, normals[i]) - body.support(normals[i]);
        if (slack < -slack_tol) {
            std::ostringstream msg;
            msg << "curve misses the supporting halfplane of direction " << i
                << " by " << -slack;
            out.refusal = msg.str();
            return out;
        }
        slacks.push_back(slack);
    }

    // Origin in the convex hull of the normals: by Caratheodory a witness
    // with at most dim+1 directions exists, so scan small subsets for the
    // best equality-constrained least-squares weights.
    const int m = static_cast<int>(normals.size());
    const int max_size = std::min(m, body.dim() + 1);
    double best_res = std::numeric_limits<double>::infinity();
    std::vector<int> best_subset;
    Vector best_weights;
    for (int s = 2; s <= max_size; ++s) {
        for_each_subset(m, s, [&](const std::vector<int>& subset) {
            Vector w;
            double res = subset_witness(normals, subset, w);
            if (res < best_res) {
                best_res = res;
                best_subset = subset;
                best_weights = w;
            }
        });
        if (best_res <= 1e-10) break;
    }
    if (best_res > 1e-10) {
        out.refusal = "origin is not in the convex hull of the directions";
        return out;
    }

    out.granted = true;
    out.certificate.normals = normals;
    out.certificate.support_slacks = slacks;
    out.certificate.hull_witness.assign(normals.size(), 0.0);
    for (size_t k = 0; k < best_subset.size(); ++k)
        out.certificate.hull_witness[best_subset[k]] = best_weights(k);
    return out;
}

TranslationFit translation_fit(const std::vector<Vector>& points,
                               const Body& body) {
    if (points.empty())
        throw std::invalid_argument("translation_fit: empty point set");
    const int n = body.dim();
    const int grid_count = n == 2 ? 720 : 2562;
    std::vector<Vector> dirs = direction_grid(n, grid_count);

    double reach = 0;
    for (const auto& p : points) reach = std::max(reach, p.norm());
    const double box = 4.0 * (body.length_scale() + reach);

    auto offsets_of = [&](const std::vector<Vector>& ds) {
        std::vector<double> offs(ds.size());
        for (size_t g = 0; g < ds.size(); ++g)
            offs[g] = body.support(ds[g]) - curve_support(points, ds[g]);
        return offs;
    };

    std::vector<double> offsets = offsets_of(dirs);
    MarginResult first = max_margin(dirs, offsets, box);
    if (!first.feasible)
        throw NumericalFailure("translation_fit: margin program infeasible");

    // One refinement pass: split the grid around near-active directions so
    // the support sampling error drops quadratically.
    const double spacing =
        n == 2 ? 2.0 * M_PI / grid_count : std::sqrt(4.0 * M_PI / grid_count);
    const double active_tol =
        10.0 * spacing * spacing * (body.length_scale() + reach);
    std::vector<Vector> refined = dirs;
    for (size_t g = 0; g < dirs.size(); ++g) {
        double gap = offsets[g] - dirs[g].dot(first.x) - first.margin;
        if (gap > active_tol) continue;
        if (n == 2) {
            double theta = std::atan2(dirs[g](1), dirs[g](0));
            for (double side : {-0.5, 0.5}) {
                double t = theta + side * spacing;
                Vector v(2);
                v << std::cos(t), std::sin(t);
                refined.push_back(v);
            }
        } else {
            Vector a = std::abs(dirs[g](0)) < 0.9 ? Vector::Unit(n, 0)
                                                  : Vector::Unit(n, 1);
            Vector t1 = (a - a.dot(dirs[g]) * dirs[g]).normalized();
            Vector t2(3);
            t2 << dirs[g](1) * t1(2) - dirs[g](2) * t1(1),
                dirs[g](2) * t1(0) - dirs[g](0) * t1(2),
                dirs[g](0) * t1(1) - dirs[g](1) * t1(0);
            for (const Vector& t : {t1, t2, Vector(-t1), Vector(-t2)})
                refined.push_back((dirs[g] + 0.5 * spacing * t).normalized());
        }
    }
    MarginResult second = max_margin(refined, offsets_of(refined), box);
    if (!second.feasible)
        throw NumericalFailure("translation_fit: refined program infeasible");

    TranslationFit out;
    out.margin = second.margin;
    out.translation = second.x;
    out.grid_count = static_cast<int>(refined.size());
    // A curve touching the body off-grid retains a residual margin of about
    // curvature_radius * spacing^2 / 8, so margins below the refined grid
    // resolution count as touching, not fitting.
    const double resolution = (n == 2 ? 1e-5 : 5e-4) *
                              (body.length_scale() + reach);
    out.fits = second.margin > resolution;
    return out;
}

bool untranslatable(const std::vector<Vector>& points, const Body& body) {
    return !translation_fit(points, body).fits;
}

double disc_orbit_length(double radius, int bounce_count, int winding) {
    if (!(radius > 0))
        throw std::invalid_argument("disc_orbit_length: radius must be positive");
    if (bounce_count < 2 || winding < 1 || winding > bounce_count - 1)
        throw std::invalid_argument("disc_orbit_length: need k >= 2, 1 <= j <= k-1");
    return 2.0 * bounce_count * radius *
           std::sin(M_PI * winding / bounce_count);
}

namespace {

void consider(Candidate& best, double len, BilliardTrajectory traj,
              std::string method) {
    if (len < best.length) {
        best.length = len;
        best.trajectory = std::move(traj);
        best.method = std::move(method);
    }
}

std::vector<Candidate> penalty_candidates(const Body& body,
                                          const EstimateOptions& opts,
                                          bool closed) {
    std::vector<Candidate> found;
    std::vector<double> schedule =
        geometric_schedule(0.1, 0.5, opts.penalty_steps);
    PenaltyParams params = make_penalty_params(body, schedule.front());
    for (const Vector& dir : fold_directions(body)) {
        try {
            DiscreteCurve seed =
                closed ? bounce_loop_seed(body, dir, opts.penalty_nodes, params)
                       : chord_seed(body, dir, opts.penalty_nodes, params);
            ContinuationTrace trace =
                continue_to_zero(seed, body, params.delta, schedule);
            std::vector<BounceEvent> bounces = detect_bounces(trace, body);
            BilliardTrajectory traj =
                assemble(trace.final_record(), bounces, body);
            ReflectionReport report =
                verify_reflection(traj, body, opts.penalty_tol);
            if (!report.passed) continue;
            if (closed && !untranslatable(traj.bounce_points, body)) continue;
            Candidate c;
            c.length = polyline_length(traj);
            c.trajectory = std::move(traj);
            std::ostringstream tag;
            tag << "penalty fold [" << dir.transpose() << "]";
            c.method = tag.str();
            found.push_back(std::move(c));
        } catch (const Error&) {
            // Corroborating pipeline only; exact candidates carry the value.
        }
    }
    return found;
}

} // namespace

ShortestPeriodicEstimate shortest_periodic(const Body& body,
                                           const EstimateOptions& opts) {
    Candidate exact;
    Candidate penalty;

    for (const DoubleNormalChord& chord : bouncing_ball_orbits(body)) {
        BouncePolygon poly;
        poly.points = {chord.p, chord.q};
        BilliardTrajectory traj = polygon_trajectory(poly);
        if (!verify_reflection(traj, body, opts.exact_tol).passed) continue;
        if (!untranslatable(traj.bounce_points, body)) continue;
        consider(exact, chord.length, std::move(traj), "bouncing-ball");
    }

    if (body.dim() == 2) {
        for (int k = 3; k <= opts.max_bounces; ++k) {
            for (int j = 1; 2 * j <= k; ++j) {
                if (std::gcd(j, k) != 1) continue;
                std::vector<double> seed(k);
                for (int i = 0; i < k; ++i)
                    seed[i] = 2.0 * M_PI * j * i / k;
                try {
                    ShootResult shot = shoot_periodic(body, k, seed);
                    BilliardTrajectory traj = polygon_trajectory(shot.polygon);
                    if (!verify_reflection(traj, body, opts.exact_tol).passed)
                        continue;
                    if (!untranslatable(traj.bounce_points, body)) continue;
                    std::ostringstream tag;
                    tag << "shoot k=" << k << " j=" << j;
                    consider(exact, shot.length, std::move(traj), tag.str());
                } catch (const Error&) {
                    // A lost orbit only thins the candidate pool.
                }
            }
        }
    }

    if (opts.use_penalty)
        for (Candidate& c : penalty_candidates(body, opts, /*closed=*/true))
            consider(penalty, c.length, std::move(c.trajectory),
                     std::move(c.method));

    // Near-ties go to the exact solvers: their witnesses carry tight
    // reflection residuals, while a penalty-assembled polygon can undershoot
    // by bounce-extraction noise without being a better orbit.
    Candidate& best =
        exact.length <= penalty.length * (1.0 + 1e-6) ? exact : penalty;
    if (!std::isfinite(best.length))
        throw SolverError(SolverError::Kind::diverged,
                          "shortest_periodic: no verified candidate", 0.0);

    ShortestPeriodicEstimate out;
    out.length = best.length;
    out.trajectory = std::move(best.trajectory);
    out.method = std::move(best.method);
    out.width_bound = 2.0 * width(body).width;
    return out;
}

BrakeEstimate shortest_brake(const Body& body, const EstimateOptions& opts) {
    Candidate exact;
    Candidate penalty;

    for (const DoubleNormalChord& chord : bouncing_ball_orbits(body)) {
        BilliardTrajectory traj = chord_brake_trajectory(chord);
        if (!verify_reflection(traj, body, opts.exact_tol).passed) continue;
        consider(exact, chord.chord, std::move(traj), "double-normal chord");
    }

    if (opts.use_penalty)
        for (Candidate& c : penalty_candidates(body, opts, /*closed=*/false))
            consider(penalty, c.length, std::move(c.trajectory),
                     std::move(c.method));

    Candidate& best =
        exact.length <= penalty.length * (1.0 + 1e-6) ? exact : penalty;
    if (!std::isfinite(best.length))
        throw SolverError(SolverError::Kind::diverged,
                          "shortest_brake: no verified candidate", 0.0);

    BrakeEstimate out;
    out.length = best.length;
    out.trajectory = std::move(best.trajectory);
    out.method = std::move(best.method);
    return out;
}

bool similar_polygons(const std::vector<Vector>& a,
                      const std::vector<Vector>& b, double tol) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    const int m = static_cast<int>(a.size());
    double pa = cyclic_perimeter(a);
    double pb = cyclic_perimeter(b);
    if (pa <= 0 || pb <= 0) return m == 1;
    Vector ca = centroid_of(a);
    Vector cb = centroid_of(b);

    auto matches = [&](int offset, int step) {
        for (int i = 0; i < m; ++i) {
            int j = ((offset + step * i) % m + m) % m;
            double d = ((a[i] - ca) / pa - (b[j] - cb) / pb).norm();
            if (d > tol) return false;
        }
        return true;
    };
    for (int offset = 0; offset < m; ++offset)
        for (int step : {1, -1})
            if (matches(offset, step)) return true;
    return false;
}

namespace {

constexpr double kEqualityRelTol = 1e-4;

InequalityVerdict basic_verdict(double lhs, double rhs, double allowance,
                                bool equality_extra = true) {
    double slack = lhs - rhs;
    if (slack < -allowance) return InequalityVerdict::fails;
    if (equality_extra &&
        std::abs(slack) <= kEqualityRelTol * std::max(std::abs(lhs), std::abs(rhs)))
        return InequalityVerdict::equality;
    return InequalityVerdict::holds;
}

const BodyEstimates& estimate_at(const std::vector<BodyEstimates>& bodies,
                                 int index, const char* role) {
    if (index < 0 || index >= static_cast<int>(bodies.size()))
        throw IncompleteReport(std::string("check_inequalities: missing ") +
                               role + " estimate");
    const BodyEstimates& e = bodies[index];
    if (!(e.periodic.length > 0) || !std::isfinite(e.periodic.length))
        throw IncompleteReport("check_inequalities: invalid estimate for " +
                               e.name);
    return e;
}

} // namespace

std::vector<InequalityReport> check_inequalities(
    const std::vector<BodyEstimates>& bodies,
    const std::vector<SumRelation>& sums,
    const std::vector<NestedRelation>& nestings) {
    std::vector<InequalityReport> reports;

    for (const BodyEstimates& e : bodies) {
        if (!(e.periodic.length > 0) || !std::isfinite(e.periodic.length) ||
            !(e.inradius_value > 0) || !(e.width_value > 0) || e.dim < 2)
            throw IncompleteReport("check_inequalities: invalid estimate for " +
                                   e.name);
        const int n = e.dim;

        InequalityReport ghomi;
        ghomi.name = "periodic >= 4 inradius";
        ghomi.subject = e.name;
        ghomi.lhs = e.periodic.length;
        ghomi.rhs = 4.0 * e.inradius_value;
        ghomi.slack = ghomi.lhs - ghomi.rhs;
        ghomi.lhs_source = e.periodic.method;
        ghomi.rhs_source = "inradius program";
        bool round = std::abs(2.0 * e.inradius_value - e.width_value) <= 1e-4;
        bool two_bounce = e.periodic.trajectory.bounce_points.size() == 2;
        ghomi.verdict = basic_verdict(ghomi.lhs, ghomi.rhs, 1e-3,
                                      round && two_bounce);
        reports.push_back(ghomi);

        InequalityReport shortb;
        shortb.name = "periodic <= 2 (dim+1) inradius";
        shortb.subject = e.name;
        shortb.lhs = 2.0 * (n + 1) * e.inradius_value;
        shortb.rhs = e.periodic.length;
        shortb.slack = shortb.lhs - shortb.rhs;
        shortb.lhs_source = "inradius program";
        shortb.rhs_source = e.periodic.method;
        shortb.verdict = basic_verdict(shortb.lhs, shortb.rhs, 1e-6);
        reports.push_back(shortb);

        if (e.brake_length) {
            if (!(*e.brake_length > 0) || !std::isfinite(*e.brake_length))
                throw IncompleteReport(
                    "check_inequalities: invalid brake estimate for " + e.name);
            InequalityReport brake;
            brake.name = "brake <= 2 dim inradius";
            brake.subject = e.name;
            brake.lhs = 2.0 * n * e.inradius_value;
            brake.rhs = *e.brake_length;
            brake.slack = brake.lhs - brake.rhs;
            brake.lhs_source = "inradius program";
            brake.rhs_source = "brake pipeline";
            brake.verdict = basic_verdict(brake.lhs, brake.rhs, 1e-6);
            reports.push_back(brake);
        }
    }

    for (const SumRelation& rel : sums) {
        const BodyEstimates& s = estimate_at(bodies, rel.sum, "sum");
        const BodyEstimates& l = estimate_at(bodies, rel.left, "left part");
        const BodyEstimates& r = estimate_at(bodies, rel.right, "right part");
        InequalityReport bm;
        bm.name = "sum superadditivity";
        bm.subject = s.name + " vs " + l.name + " + " + r.name;
        bm.lhs = s.periodic.length;
        bm.rhs = l.periodic.length + r.periodic.length;
        bm.slack = bm.lhs - bm.rhs;
        bm.lhs_source = s.periodic.method;
        bm.rhs_source = l.periodic.method + " + " + r.periodic.method;
        bool witnesses_similar =
            similar_polygons(l.periodic.trajectory.bounce_points,
                             r.periodic.trajectory.bounce_points);
        bm.verdict = basic_verdict(bm.lhs, bm.rhs, 1e-3, witnesses_similar);
        reports.push_back(bm);
    }

    for (const NestedRelation& rel : nestings) {
        const BodyEstimates& inner = estimate_at(bodies, rel.inner, "inner");
        const BodyEstimates& outer = estimate_at(bodies, rel.outer, "outer");
        InequalityReport mono;
        mono.name = "nested monotonicity";
        mono.subject = inner.name + " inside " + outer.name;
        mono.lhs = outer.periodic.length;
        mono.rhs = inner.periodic.length;
        mono.slack = mono.lhs - mono.rhs;
        mono.lhs_source = outer.periodic.method;
        mono.rhs_source = inner.periodic.method;
        mono.verdict = basic_verdict(mono.lhs, mono.rhs, 1e-6);
        reports.push_back(mono);
    }

    return reports;
}

} // namespace billiards
