#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "billiards/saddle.hpp"

using namespace billiards;

namespace {

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

// Per-segment conserved quantity: staggered kinetic term plus the
// potential at the segment midpoint.
double segment_energy_rel_std(const CriticalPointRecord& rec,
                              const Body& body) {
    const DiscreteCurve& c = rec.curve;
    double dt = c.dt();
    std::vector<double> e;
    for (int i = 0; i < c.segment_count(); ++i) {
        Vector mid = 0.5 * (c.node(i) + c.node(i + 1));
        double kin = (c.node(i + 1) - c.node(i)).squaredNorm() / (2 * dt * dt);
        e.push_back(kin + rec.epsilon * barrier_value(body, rec.delta, mid));
    }
    double mean = 0;
    for (double v : e) mean += v;
    mean /= e.size();
    double var = 0;
    for (double v : e) var += (v - mean) * (v - mean);
    var /= e.size();
    return std::sqrt(var) / mean;
}

} // namespace

TEST_CASE("critical point on the disc: diameter loop") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    const double delta = 0.1;
    PenaltyParams p{delta, 1e-3};
    // Adaptive margin puts the fold tips near the equilibrium standoff.
    DiscreteCurve seed = bounce_loop_seed(disc, vec2(1, 0), 128, p);
    CriticalPointRecord rec = find_critical_point(seed, disc, p);

    CHECK(rec.grad_norm <= 1e-9 * 128);
    CHECK(rec.energy_value ==
          doctest::Approx(rec.lagrangian_value + 2 * rec.potential_integral)
              .epsilon(1e-12));
    CHECK(rec.energy_value > 0);
    // Speed-4 diameter loop: energy near len^2/2 = 8, shortened a little by
    // the barrier standoff at this epsilon.
    CHECK(std::abs(rec.energy_value - 8.0) < 0.8);
    double len = length(rec.curve);
    CHECK(len > 3.6);
    CHECK(len < 4.01);
    CHECK(rec.morse_index >= 0);
    CHECK(rec.morse_index <= 256);

    SUBCASE("solver is deterministic") {
        CriticalPointRecord rec2 = find_critical_point(seed, disc, p);
        CHECK((rec2.curve.nodes - rec.curve.nodes).norm() == 0.0);
        CHECK(rec2.lagrangian_value == rec.lagrangian_value);
    }
}

TEST_CASE("per-segment energy conservation at resolved epsilon") {
    // Conservation needs the smooth turn (duration ~ sqrt(eps/E)/speed) to
    // span several nodes, so test in a regime where N resolves it.
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    const double delta = 0.1;
    PenaltyParams p{delta, 5e-2};
    DiscreteCurve seed = bounce_loop_seed(disc, vec2(1, 0), 512, p);
    CriticalPointRecord rec = find_critical_point(seed, disc, p);
    CHECK(segment_energy_rel_std(rec, disc) <= 1e-3);
}

TEST_CASE("constant plateau seed collapses") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    DiscreteCurve seed;
    seed.closed = true;
    seed.nodes = Matrix::Zero(32, 2);
    PenaltyParams p{0.1, 1e-2};
    try {
        find_critical_point(seed, disc, p);
        FAIL("expected collapse");
    } catch (const SolverError& e) {
        CHECK(e.kind == SolverError::Kind::collapsed);
        CHECK(e.epsilon == 1e-2);
    }
}

TEST_CASE("continuation on the disc") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    const double delta = 0.1;
    DiscreteCurve seed = bounce_loop_seed(disc, vec2(1, 0), 96, delta);
    auto schedule = geometric_schedule(0.1, 0.5, 9);
    ContinuationTrace trace = continue_to_zero(seed, disc, delta, schedule);

    CHECK(trace.steps.size() == 9);
    CHECK_FALSE(trace.potential_trend_broken);
    for (size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& rec = trace.steps[k].record;
        CHECK(rec.epsilon == schedule[k]);
        CHECK(rec.energy_value ==
              doctest::Approx(rec.lagrangian_value + 2 * rec.potential_integral)
                  .epsilon(1e-12));
        CHECK(trace.steps[k].force_profile.minCoeff() >= 0.0);
        if (k > 0) {
            // Warm starts stay in the previous basin: successive initial
            // residuals are comparable.
            CHECK(trace.steps[k].warm_start_grad_norm <=
                  10.0 * trace.steps[k - 1].warm_start_grad_norm);
        }
    }
    // Vanishing-potential trend across the schedule.
    double first = trace.steps.front().record.potential_integral;
    double last = trace.steps.back().record.potential_integral;
    CHECK(last < 0.25 * first);
    // Length marches toward the diameter-orbit value 4.
    double len = length(trace.final_record().curve);
    CHECK(std::abs(len - 4.0) < 0.12);
}

TEST_CASE("brake continuation on the disc") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    const double delta = 0.1;
    DiscreteCurve seed = chord_seed(disc, vec2(0, 1), 96, delta);
    auto schedule = geometric_schedule(0.1, 0.5, 9);
    ContinuationTrace trace = continue_to_zero(seed, disc, delta, schedule);
    const auto& rec = trace.final_record();
    CHECK_FALSE(rec.curve.closed);
    double len = length(rec.curve);
    CHECK(std::abs(len - 2.0) < 0.1);
    // Endpoints push into the boundary collar as epsilon shrinks.
    CHECK(disc.signed_distance(rec.curve.node(0)) < delta);
    CHECK(disc.signed_distance(rec.curve.node(95)) < delta);
    // The interior of the chord stays straight: middle third has tiny
    // second differences.
    for (int i = 40; i < 56; ++i) {
        Vector sd2 = rec.curve.node(i + 1) - 2 * rec.curve.node(i) +
                     rec.curve.node(i - 1);
        CHECK(sd2.norm() <= 1e-6);
    }
}

TEST_CASE("morse spectrum basics") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    PenaltyParams p{0.1, 1e-2};
    DiscreteCurve loop;
    loop.closed = true;
    loop.nodes.resize(24, 2);
    for (int i = 0; i < 24; ++i) {
        double t = 2 * 3.14159265358979 * i / 24;
        loop.nodes(i, 0) = 0.3 * std::cos(t);
        loop.nodes(i, 1) = 0.3 * std::sin(t);
    }
    Vector spec = morse_spectrum(loop, disc, p);
    for (int i = 0; i + 1 < spec.size(); ++i) CHECK(spec(i) <= spec(i + 1));
    CHECK(morse_index_of(spec) == 0); // plateau loop: Laplacian, PSD
}

TEST_CASE("schedule and input validation") {
    CHECK_THROWS_AS(geometric_schedule(-1, 0.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(geometric_schedule(1, 1.5, 3), std::invalid_argument);
    CHECK(geometric_schedule(1.0, 0.5, 3) ==
          std::vector<double>{1.0, 0.5, 0.25});

    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    DiscreteCurve seed = bounce_loop_seed(disc, vec2(1, 0), 32, 0.1);
    CHECK_THROWS_AS(continue_to_zero(seed, disc, 0.1, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(continue_to_zero(seed, disc, 0.1, {0.1, 0.2}),
                    std::invalid_argument);
}

TEST_CASE("ray marching and seed constructors") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    SUBCASE("ray_to_depth") {
        Vector q = ray_to_depth(disc, vec2(0, 0), vec2(1, 0), 0.2);
        CHECK(q(0) == doctest::Approx(0.8).epsilon(1e-10));
        CHECK(q(1) == 0.0);
        CHECK_THROWS_AS(ray_to_depth(disc, vec2(0.95, 0), vec2(1, 0), 0.2),
                        std::invalid_argument);
    }
    SUBCASE("bounce loop seed") {
        DiscreteCurve seed = bounce_loop_seed(disc, vec2(0, 1), 64, 0.1);
        CHECK(seed.closed);
        CHECK(seed.node_count() == 64);
        double min_sd = 1e9;
        for (int i = 0; i < 64; ++i)
            min_sd = std::min(min_sd, disc.signed_distance(seed.node(i)));
        CHECK(min_sd > 0.05);
        // Long axis along the requested direction.
        CHECK(std::abs(seed.nodes.col(1).maxCoeff() - 0.9) < 1e-9);
    }
    SUBCASE("chord seed") {
        DiscreteCurve seed = chord_seed(disc, vec2(1, 0), 32, 0.25);
        CHECK_FALSE(seed.closed);
        CHECK(seed.node(0)(0) == doctest::Approx(-0.75).epsilon(1e-9));
        CHECK(seed.node(31)(0) == doctest::Approx(0.75).epsilon(1e-9));
        for (int i = 0; i < 32; ++i) CHECK(seed.node(i)(1) == 0.0);
    }
    SUBCASE("polygon loop seed") {
        std::vector<Vector> square = {vec2(0.8, 0.8), vec2(-0.8, 0.8),
                                      vec2(-0.8, -0.8), vec2(0.8, -0.8)};
        DiscreteCurve seed = polygon_loop_seed(square, vec2(0, 0), 40, 0.05);
        CHECK(seed.closed);
        CHECK(seed.node_count() == 40);
        // All nodes strictly inside the square scaled by 0.95.
        CHECK(seed.nodes.cwiseAbs().maxCoeff() <= 0.8 * 0.95 + 1e-12);
        CHECK(length(seed) == doctest::Approx(0.95 * 6.4).epsilon(0.01));
    }
}
