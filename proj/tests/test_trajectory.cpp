#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "billiards/errors.hpp"
#include "billiards/trajectory.hpp"

using namespace billiards;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

ContinuationTrace run_disc_loop(int steps) {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    PenaltyParams p{0.1, 0.1};
    DiscreteCurve seed = bounce_loop_seed(disc, vec2(1, 0), 96, p);
    return continue_to_zero(seed, disc, 0.1, geometric_schedule(0.1, 0.5, steps));
}

// Regular k-gon orbit inscribed in the unit circle, phase offset so no
// vertex sits at angle 0. Exact reflection by symmetry.
BilliardTrajectory inscribed_polygon_orbit(int k) {
    BilliardTrajectory traj;
    traj.kind = BilliardTrajectory::Kind::periodic;
    double side = 2.0 * std::sin(std::numbers::pi / k);
    traj.speed = k * side;
    traj.total_length = traj.speed;
    std::vector<Vector> verts;
    for (int j = 0; j < k; ++j) {
        double th = std::numbers::pi / k + 2.0 * std::numbers::pi * j / k;
        verts.push_back(vec2(std::cos(th), std::sin(th)));
        traj.bounce_times.push_back(double(j) / k);
        traj.bounce_points.push_back(verts.back());
    }
    for (int j = 0; j < k; ++j) {
        Vector a = verts[j], b = verts[(j + 1) % k];
        traj.segments.push_back({a, b, (b - a).normalized()});
    }
    return traj;
}

ContinuationTrace fake_trace(const Vector& profile, bool closed) {
    ContinuationTrace trace;
    trace.delta = 0.1;
    ContinuationStep step;
    step.record.curve.closed = closed;
    step.record.curve.nodes.resize(profile.size(), 2);
    for (int i = 0; i < profile.size(); ++i) {
        double t = 2 * std::numbers::pi * i / double(profile.size());
        step.record.curve.nodes.row(i) << 0.5 * std::cos(t), 0.5 * std::sin(t);
    }
    step.record.energy_value = 1.0;
    step.record.epsilon = 1e-4;
    step.record.delta = 0.1;
    step.force_profile = profile;
    step.warm_start_grad_norm = 0;
    step.curve_shift = 0;
    trace.steps.push_back(step);
    return trace;
}

} // namespace

TEST_CASE("disc loop pipeline: two antipodal bounces, length four") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    ContinuationTrace trace = run_disc_loop(13);
    auto bounces = detect_bounces(trace, disc);

    REQUIRE(bounces.size() == 2);
    // Times approximately 0 and 1/2 (bounce phase of the fold).
    double t0 = bounces[0].time, t1 = bounces[1].time;
    CHECK(std::min(t0, 1.0 - t0) < 0.03);
    CHECK(std::abs(t1 - 0.5) < 0.03);
    // Antipodal boundary points on the seeded diameter.
    CHECK(std::abs(std::abs(bounces[0].point(0)) - 1.0) < 1e-6);
    CHECK(std::abs(bounces[0].point(1)) < 1e-6);
    CHECK((bounces[0].point + bounces[1].point).norm() < 1e-3);

    BilliardTrajectory traj = assemble(trace.final_record(), bounces, disc);
    CHECK(traj.kind == BilliardTrajectory::Kind::periodic);
    CHECK(traj.segments.size() == 2);
    CHECK(std::abs(traj.total_length - 4.0) < 1e-2);
    CHECK(std::abs(traj.speed - 4.0) < 1e-2);
    CHECK(int(traj.bounce_points.size()) <= 3); // planar bounce-count bound

    ReflectionReport rep = verify_reflection(traj, disc, 1e-3);
    CHECK(rep.passed);
    CHECK(rep.max_residual <= 1e-3);
    for (const auto& b : rep.bounces) {
        CHECK(b.tangential >= 0);
        CHECK(b.normal_sum >= 0);
        CHECK(b.speed_error >= 0);
    }
}

TEST_CASE("ellipse minor-axis loop bounces at the minor vertices") {
    Vector semi(2);
    semi << 2.0, 1.0;
    Body ell = Body::make_ellipsoid(vec2(0, 0), semi);
    PenaltyParams p{0.1, 0.1};
    DiscreteCurve seed = bounce_loop_seed(ell, vec2(0, 1), 96, p);
    ContinuationTrace trace =
        continue_to_zero(seed, ell, 0.1, geometric_schedule(0.1, 0.5, 13));
    auto bounces = detect_bounces(trace, ell);

    REQUIRE(bounces.size() == 2);
    for (const auto& b : bounces) {
        CHECK(std::abs(b.point(0)) < 1e-3);
        CHECK(std::abs(std::abs(b.point(1)) - 1.0) < 1e-6);
    }
    BilliardTrajectory traj = assemble(trace.final_record(), bounces, ell);
    CHECK(std::abs(traj.total_length - 4.0) < 1e-2);
    CHECK(verify_reflection(traj, ell, 1e-3).passed);
}

TEST_CASE("disc brake pipeline: no interior bounces, length two") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    PenaltyParams p{0.1, 0.1};
    DiscreteCurve seed = chord_seed(disc, vec2(1, 0), 96, p);
    ContinuationTrace trace =
        continue_to_zero(seed, disc, 0.1, geometric_schedule(0.1, 0.5, 13));
    auto bounces = detect_bounces(trace, disc);
    CHECK(bounces.empty());

    BilliardTrajectory traj = assemble(trace.final_record(), bounces, disc);
    CHECK(traj.kind == BilliardTrajectory::Kind::brake);
    CHECK(traj.segments.size() == 1);
    CHECK(std::abs(traj.total_length - 2.0) < 1e-2);
    // Endpoints on the boundary at the diameter's ends.
    CHECK(std::abs(traj.segments[0].start.norm() - 1.0) < 1e-9);
    CHECK(std::abs(traj.segments[0].end.norm() - 1.0) < 1e-9);

    ReflectionReport rep = verify_reflection(traj, disc, 1e-3);
    CHECK(rep.passed);
    CHECK(rep.brake_start <= 1e-3);
    CHECK(rep.brake_end <= 1e-3);
    CHECK(int(traj.bounce_points.size()) <= 1); // planar brake bounce bound
}

TEST_CASE("assembly fails when the schedule stops too early") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    ContinuationTrace trace = run_disc_loop(1); // stops at eps = 0.1
    auto bounces = detect_bounces(trace, disc);
    CHECK_THROWS_AS(assemble(trace.final_record(), bounces, disc),
                    AssemblyFailure);
}

TEST_CASE("bounce detection error modes") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    SUBCASE("flat profile has no bounces") {
        ContinuationTrace trace = fake_trace(Vector::Ones(64), true);
        try {
            detect_bounces(trace, disc);
            FAIL("expected no_bounces");
        } catch (const BounceDetectionError& e) {
            CHECK(e.kind == BounceDetectionError::Kind::no_bounces);
        }
    }
    SUBCASE("nearby clusters are ambiguous") {
        Vector f = Vector::Ones(64);
        f(10) = 1e4;
        f(13) = 1e4; // two quiet cells between spikes < gap of 3
        ContinuationTrace trace = fake_trace(f, true);
        try {
            detect_bounces(trace, disc);
            FAIL("expected merge_ambiguity");
        } catch (const BounceDetectionError& e) {
            CHECK(e.kind == BounceDetectionError::Kind::merge_ambiguity);
        }
    }
    SUBCASE("spike across the loop seam is one cluster") {
        Vector f = Vector::Ones(64);
        f(63) = 1e4;
        f(0) = 1e4;
        f(32) = 1e4;
        ContinuationTrace trace = fake_trace(f, true);
        auto bounces = detect_bounces(trace, disc);
        REQUIRE(bounces.size() == 2);
        // One cluster sits mid-loop, the seam cluster wraps to ~0 or ~1.
        double seam = std::min({bounces[0].time, 1.0 - bounces[0].time,
                                bounces[1].time, 1.0 - bounces[1].time});
        CHECK(seam < 0.02);
        CHECK((std::abs(bounces[0].time - 0.5) < 0.02 ||
               std::abs(bounces[1].time - 0.5) < 0.02));
    }
    SUBCASE("open-curve endpoint clusters are dropped") {
        Vector f = Vector::Ones(64);
        f(0) = 1e4;
        f(1) = 1e4;
        f(62) = 1e4;
        f(63) = 1e4;
        f(30) = 1e4;
        ContinuationTrace trace = fake_trace(f, false);
        auto bounces = detect_bounces(trace, disc);
        REQUIRE(bounces.size() == 1);
        CHECK(std::abs(bounces[0].time - 30.0 / 63.0) < 1e-12);
    }
}

TEST_CASE("reflection check on exact inscribed orbits") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    SUBCASE("square orbit is exact") {
        BilliardTrajectory sq = inscribed_polygon_orbit(4);
        ReflectionReport rep = verify_reflection(sq, disc, 1e-9);
        CHECK(rep.passed);
        CHECK(rep.max_residual <= 1e-12);
    }
    SUBCASE("perturbed square fails loudly") {
        BilliardTrajectory sq = inscribed_polygon_orbit(4);
        double th = std::numbers::pi / 4 + 0.1; // rotate one vertex
        Vector moved = vec2(std::cos(th), std::sin(th));
        sq.bounce_points[0] = moved;
        sq.segments[0].start = moved;
        sq.segments[0].direction =
            (sq.segments[0].end - moved).normalized();
        sq.segments[3].end = moved;
        sq.segments[3].direction =
            (moved - sq.segments[3].start).normalized();
        ReflectionReport rep = verify_reflection(sq, disc, 1e-3);
        CHECK_FALSE(rep.passed);
        double worst = 0;
        for (const auto& b : rep.bounces)
            worst = std::max(worst, b.tangential);
        CHECK(worst > 1e-2);
    }
    SUBCASE("width-direction bouncing ball on the ellipse") {
        Vector semi(2);
        semi << 2.0, 1.0;
        Body ell = Body::make_ellipsoid(vec2(0, 0), semi);
        BilliardTrajectory bb;
        bb.kind = BilliardTrajectory::Kind::periodic;
        bb.speed = 4.0;
        bb.total_length = 4.0;
        bb.bounce_times = {0.0, 0.5};
        bb.bounce_points = {vec2(0, 1), vec2(0, -1)};
        bb.segments.push_back({vec2(0, 1), vec2(0, -1), vec2(0, -1)});
        bb.segments.push_back({vec2(0, -1), vec2(0, 1), vec2(0, 1)});
        ReflectionReport rep = verify_reflection(bb, ell, 1e-9);
        CHECK(rep.passed);
        CHECK(rep.max_residual <= 1e-9);
    }
}

TEST_CASE("assembled length tracks the lagrangian value") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    ContinuationTrace trace = run_disc_loop(13);
    auto bounces = detect_bounces(trace, disc);
    BilliardTrajectory traj = assemble(trace.final_record(), bounces, disc);
    double L = trace.final_record().lagrangian_value;
    CHECK(std::abs(traj.total_length - std::sqrt(2.0 * L)) <=
          0.02 * traj.total_length);
}
