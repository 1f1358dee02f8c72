#include "billiards/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "billiards/errors.hpp"

namespace billiards {
namespace {

// Distance from x to the segment [a, b].
double segment_distance(const Vector& x, const Vector& a, const Vector& b) {
    Vector w = b - a;
    double ww = w.squaredNorm();
    double t = ww > 0 ? std::clamp((x - a).dot(w) / ww, 0.0, 1.0) : 0.0;
    return (x - (a + t * w)).norm();
}

struct Cluster {
    std::vector<int> cells; // node indices, contiguous (cyclically for loops)
};

std::vector<Cluster> force_clusters(const Vector& f, double cut, bool closed) {
    const int n = int(f.size());
    std::vector<Cluster> runs;
    for (int i = 0; i < n; ++i) {
        if (!(f(i) > cut)) continue;
        if (!runs.empty() && runs.back().cells.back() == i - 1)
            runs.back().cells.push_back(i);
        else
            runs.push_back({{i}});
    }
    // A loop cluster may wrap around the seam; glue it back together. The
    // glued indices run past n-1 so times stay contiguous; reduce mod n to
    // address nodes.
    if (closed && runs.size() > 1 && runs.front().cells.front() == 0 &&
        runs.back().cells.back() == n - 1) {
        Cluster head = runs.front();
        runs.erase(runs.begin());
        for (int i : head.cells) runs.back().cells.push_back(i + n);
    }
    return runs;
}

} // namespace

std::vector<BounceEvent> detect_bounces(const ContinuationTrace& trace,
                                        const Body& body,
                                        const BounceOptions& opts) {
    const CriticalPointRecord& rec = trace.final_record();
    const Vector& f = trace.steps.back().force_profile;
    const DiscreteCurve& curve = rec.curve;
    const int N = curve.node_count();

    double cut = opts.threshold * f.mean();
    std::vector<Cluster> runs = force_clusters(f, cut, curve.closed);
    if (runs.empty())
        throw BounceDetectionError(
            BounceDetectionError::Kind::no_bounces,
            "force profile never exceeds the bounce threshold");

    // Distinct bounces must be separated by at least `gap` quiet cells.
    for (size_t k = 0; k + 1 < runs.size(); ++k) {
        int gap = runs[k + 1].cells.front() - runs[k].cells.back() - 1;
        if (gap < opts.gap)
            throw BounceDetectionError(
                BounceDetectionError::Kind::merge_ambiguity,
                "bounce clusters nearly touch; refine the curve or schedule");
    }
    if (curve.closed && runs.size() > 1) {
        int wrap = runs.front().cells.front() + N -
                   (runs.back().cells.back() % N) - 1;
        if (wrap < opts.gap)
            throw BounceDetectionError(
                BounceDetectionError::Kind::merge_ambiguity,
                "bounce clusters nearly touch across the loop seam");
    }

    std::vector<BounceEvent> events;
    for (const Cluster& run : runs) {
        // Open-curve clusters touching an endpoint are the brake points of
        // the trajectory, not interior bounces.
        if (!curve.closed &&
            (run.cells.front() == 0 || run.cells.back() == N - 1))
            continue;
        double mass = 0, t_acc = 0;
        Vector x_acc = Vector::Zero(curve.dim());
        for (int cell : run.cells) {
            int i = cell % N;
            double w = f(i);
            mass += w;
            t_acc += w * curve.node_time(cell); // unwrapped across the seam
            x_acc += w * curve.node(i);
        }
        double t = t_acc / mass;
        if (curve.closed) t -= std::floor(t); // reduce to [0,1)
        events.push_back({t, body.project(x_acc / mass).point});
    }
    std::sort(events.begin(), events.end(),
              [](const BounceEvent& a, const BounceEvent& b) {
                  return a.time < b.time;
              });
    return events;
}

BilliardTrajectory assemble(const CriticalPointRecord& final_record,
                            const std::vector<BounceEvent>& bounces,
                            const Body& body, const AssemblyOptions& opts) {
    const DiscreteCurve& curve = final_record.curve;
    const int N = curve.node_count();
    const double scale = body.length_scale();

    BilliardTrajectory traj;
    traj.kind = curve.closed ? BilliardTrajectory::Kind::periodic
                             : BilliardTrajectory::Kind::brake;
    traj.speed = std::sqrt(2.0 * final_record.energy_value);
    traj.total_length = traj.speed; // unit time span
    for (const BounceEvent& b : bounces) {
        traj.bounce_times.push_back(b.time);
        traj.bounce_points.push_back(b.point);
    }

    // Vertex cycle/path and the time boundaries between straight pieces.
    std::vector<Vector> verts;
    std::vector<double> knots; // segment k spans [knots[k], knots[k+1]]
    if (curve.closed) {
        if (bounces.size() < 2)
            throw AssemblyFailure(
                "periodic trajectory needs at least two bounces");
        for (const BounceEvent& b : bounces) {
            verts.push_back(b.point);
            knots.push_back(b.time);
        }
        verts.push_back(bounces.front().point);
        knots.push_back(bounces.front().time + 1.0);
    } else {
        verts.push_back(body.project(curve.node(0)).point);
        knots.push_back(0.0);
        for (const BounceEvent& b : bounces) {
            verts.push_back(b.point);
            knots.push_back(b.time);
        }
        verts.push_back(body.project(curve.node(N - 1)).point);
        knots.push_back(1.0);
    }

    double polygon = 0.0;
    for (size_t k = 0; k + 1 < verts.size(); ++k) {
        Vector w = verts[k + 1] - verts[k];
        double len = w.norm();
        if (len <= 1e-9 * scale)
            throw AssemblyFailure("coincident consecutive bounce points");
        traj.segments.push_back({verts[k], verts[k + 1], w / len});
        polygon += len;
    }

    // The curve must already be straight between bounces...
    double deviation = 0.0;
    for (int i = 0; i < N; ++i) {
        double t = curve.node_time(i);
        if (curve.closed && t < knots.front()) t += 1.0;
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        size_t k = std::clamp<size_t>(it - knots.begin(), 1, knots.size() - 1);
        deviation = std::max(deviation, segment_distance(curve.node(i),
                                                         verts[k - 1],
                                                         verts[k]));
    }
    if (deviation > opts.straightness * scale)
        throw AssemblyFailure(
            "curve bends away from its chords; extend the epsilon schedule");

    // ...and its speed bookkeeping must match the straight-line geometry:
    // a barrier that still stores noticeable potential shortens the curve
    // well below speed * time, which the chord polygon exposes.
    if (std::abs(polygon - traj.total_length) >
        opts.length_slack * traj.total_length)
        throw AssemblyFailure(
            "polygon length disagrees with the conserved speed; extend the "
            "epsilon schedule");
    return traj;
}

ReflectionReport verify_reflection(const BilliardTrajectory& traj,
                                   const Body& body, double tol) {
    ReflectionReport rep;
    rep.tol = tol;
    const double speed = std::max(traj.speed, 1e-300);
    const size_t m = traj.bounce_points.size();
    const size_t S = traj.segments.size();

    auto duration = [&](size_t k) {
        double t0, t1;
        if (traj.kind == BilliardTrajectory::Kind::periodic) {
            t0 = traj.bounce_times[k];
            t1 = k + 1 < m ? traj.bounce_times[k + 1]
                           : traj.bounce_times[0] + 1.0;
        } else {
            t0 = k == 0 ? 0.0 : traj.bounce_times[k - 1];
            t1 = k < m ? traj.bounce_times[k] : 1.0;
        }
        return std::max(t1 - t0, 1e-300);
    };

    bool genuine = true;
    for (size_t k = 0; k < m && S > 0; ++k) {
        // Incoming/outgoing segments around bounce k.
        size_t out_idx, in_idx;
        if (traj.kind == BilliardTrajectory::Kind::periodic) {
            out_idx = k;
            in_idx = (k + S - 1) % S;
        } else {
            out_idx = k + 1;
            in_idx = k;
        }
        const TrajectorySegment& in = traj.segments[in_idx];
        const TrajectorySegment& out = traj.segments[out_idx];
        Vector nu = body.boundary_normal(traj.bounce_points[k]);

        Vector v_in = speed * in.direction;
        Vector v_out = speed * out.direction;
        Vector diff = v_out - v_in;
        Vector sum = v_out + v_in;

        ReflectionReport::BounceCheck chk;
        chk.tangential = (diff - diff.dot(nu) * nu).norm() / speed;
        chk.normal_sum = std::abs(sum.dot(nu)) / speed;
        // Elastic bounce: the speeds on both sides agree. (Their common
        // deviation from the nominal sqrt(2E) is assembly bookkeeping,
        // checked by assemble(), not a reflection-law violation.)
        double vi = (in.end - in.start).norm() / duration(in_idx);
        double vo = (out.end - out.start).norm() / duration(out_idx);
        chk.speed_error = std::abs(vi - vo) / speed;
        rep.bounces.push_back(chk);
        rep.max_residual = std::max({rep.max_residual, chk.tangential,
                                     chk.normal_sum, chk.speed_error});
        // The reflection law demands a genuinely broken direction.
        if (diff.norm() / speed <= tol) genuine = false;
    }

    if (traj.kind == BilliardTrajectory::Kind::brake && S > 0) {
        Vector u0 = traj.segments.front().direction;
        Vector n0 = body.boundary_normal(traj.segments.front().start);
        rep.brake_start = (u0 - u0.dot(n0) * n0).norm();
        Vector u1 = traj.segments.back().direction;
        Vector n1 = body.boundary_normal(traj.segments.back().end);
        rep.brake_end = (u1 - u1.dot(n1) * n1).norm();
        rep.max_residual =
            std::max({rep.max_residual, rep.brake_start, rep.brake_end});
    }

    rep.passed = genuine && rep.max_residual <= tol;
    return rep;
}

} // namespace billiards
