#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "billiards/loopspace.hpp"

using namespace billiards;

namespace {

constexpr double kPi = std::numbers::pi;

DiscreteCurve circle_curve(int N, double r, double cx = 0, double cy = 0) {
    DiscreteCurve c;
    c.closed = true;
    c.nodes.resize(N, 2);
    for (int i = 0; i < N; ++i) {
        double t = 2 * kPi * i / N;
        c.nodes(i, 0) = cx + r * std::cos(t);
        c.nodes(i, 1) = cy + r * std::sin(t);
    }
    return c;
}

DiscreteCurve segment_curve(int N, Vector a, Vector b) {
    DiscreteCurve c;
    c.closed = false;
    c.nodes.resize(N, a.size());
    for (int i = 0; i < N; ++i) {
        double s = double(i) / (N - 1);
        c.nodes.row(i) = ((1 - s) * a + s * b).transpose();
    }
    return c;
}

// Smooth random loop inside the ellipse (2,1), dipping into the collar.
DiscreteCurve wiggly_loop(int N, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    double p1 = u(rng), p2 = u(rng);
    DiscreteCurve c;
    c.closed = true;
    c.nodes.resize(N, 2);
    for (int i = 0; i < N; ++i) {
        double t = 2 * kPi * i / N;
        double r = 0.72 + 0.12 * std::sin(2 * t + p1) + 0.06 * std::cos(3 * t + p2);
        c.nodes(i, 0) = 1.78 * r * std::cos(t);
        c.nodes(i, 1) = 0.93 * r * std::sin(t);
    }
    return c;
}

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

} // namespace

TEST_CASE("energy closed forms") {
    SUBCASE("uniform circle matches the exact discrete value") {
        for (int N : {16, 64, 256}) {
            double r = 0.8;
            DiscreteCurve c = circle_curve(N, r);
            double exact = 2.0 * N * N * r * r * std::pow(std::sin(kPi / N), 2);
            CHECK(energy(c) == doctest::Approx(exact).epsilon(1e-12));
        }
        // Continuum limit 2 pi^2 r^2.
        DiscreteCurve c = circle_curve(2048, 0.8);
        CHECK(energy(c) ==
              doctest::Approx(2 * kPi * kPi * 0.64).epsilon(1e-5));
    }
    SUBCASE("uniform open segment is exactly L^2/2 at every N") {
        for (int N : {8, 33, 100}) {
            DiscreteCurve c = segment_curve(N, vec2(-0.7, 0.2), vec2(0.5, -0.4));
            double L2 = (vec2(-0.7, 0.2) - vec2(0.5, -0.4)).squaredNorm();
            CHECK(energy(c) == doctest::Approx(L2 / 2).epsilon(1e-12));
        }
    }
    SUBCASE("constant curve") {
        DiscreteCurve c;
        c.closed = true;
        c.nodes = Matrix::Zero(16, 2);
        CHECK(energy(c) == 0.0);
        CHECK(length(c) == 0.0);
    }
}

TEST_CASE("length and the Cauchy-Schwarz bound") {
    SUBCASE("square loop") {
        DiscreteCurve c;
        c.closed = true;
        c.nodes.resize(8, 2);
        double s = 0.6;
        // Corner and midside nodes around a square of side s.
        c.nodes << 0, 0, s / 2, 0, s, 0, s, s / 2, s, s, s / 2, s, 0, s, 0, s / 2;
        CHECK(length(c) == doctest::Approx(4 * s).epsilon(1e-12));
    }
    SUBCASE("length squared at most twice the energy") {
        for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
            DiscreteCurve c = wiggly_loop(48, seed);
            CHECK(length(c) * length(c) <= 2 * energy(c) + 1e-12);
        }
        // Equality for uniform segment lengths.
        DiscreteCurve c = circle_curve(64, 0.8);
        CHECK(length(c) * length(c) ==
              doctest::Approx(2 * energy(c)).epsilon(1e-12));
    }
}

TEST_CASE("lagrangian values") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    PenaltyParams p = make_penalty_params(disc, 1.0); // delta = 0.1

    SUBCASE("plateau curve: lagrangian equals energy") {
        DiscreteCurve c = circle_curve(32, 0.3);
        CHECK(lagrangian(c, disc, p) == doctest::Approx(energy(c)).epsilon(1e-14));
        CHECK(potential_integral(c, disc, p) == 0.0);
    }
    SUBCASE("constant curve at the center") {
        DiscreteCurve c;
        c.closed = true;
        c.nodes = Matrix::Zero(16, 2);
        CHECK(lagrangian(c, disc, p) == 0.0);
    }
    SUBCASE("constant curve at collar depth delta") {
        double d = p.delta;
        for (bool closed : {true, false}) {
            DiscreteCurve c;
            c.closed = closed;
            c.nodes = Matrix::Zero(16, 2);
            c.nodes.col(0).setConstant(1.0 - d);
            // Sum of quadrature weights times dt is exactly 1 either way.
            CHECK(lagrangian(c, disc, p) ==
                  doctest::Approx(-3.0 * p.epsilon / (4 * p.delta * p.delta))
                      .epsilon(1e-11));
        }
    }
    SUBCASE("domain violation") {
        DiscreteCurve c = circle_curve(16, 1.5);
        CHECK_THROWS_AS(lagrangian(c, disc, p), DomainViolation);
    }
}

TEST_CASE("gradient matches finite differences") {
    Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));
    PenaltyParams p = make_penalty_params(ell, 1.0); // delta = 0.1
    for (unsigned seed : {11u, 12u, 13u, 14u}) {
        DiscreteCurve c = wiggly_loop(16, seed);
        CurveTangent g = grad_lagrangian(c, ell, p);
        double h = 1e-6;
        CurveTangent gfd(16, 2);
        for (int i = 0; i < 16; ++i)
            for (int d = 0; d < 2; ++d) {
                DiscreteCurve cp = c, cm = c;
                cp.nodes(i, d) += h;
                cm.nodes(i, d) -= h;
                gfd(i, d) = (lagrangian(cp, ell, p) - lagrangian(cm, ell, p)) /
                            (2 * h);
            }
        CHECK((g - gfd).norm() / gfd.norm() <= 1e-6);
    }
}

TEST_CASE("open-curve gradient: one-sided stencil at the ends") {
    Body disc = Body::make_ball(vec2(0, 0), 1.0);
    PenaltyParams p = make_penalty_params(disc, 1.0);
    // Straight chord in the plateau: interior rows vanish, end rows carry
    // the discrete velocity defect (natural boundary condition residual).
    DiscreteCurve c = segment_curve(16, vec2(-0.4, 0.1), vec2(0.4, 0.1));
    CurveTangent g = grad_lagrangian(c, disc, p);
    double dt = c.dt();
    Vector vel = (c.node(1) - c.node(0)) / dt;
    CHECK((g.row(0).transpose() + vel).norm() <= 1e-12);
    CHECK((g.row(15).transpose() - vel).norm() <= 1e-12);
    for (int i = 1; i < 15; ++i) CHECK(g.row(i).norm() <= 1e-12);
}

TEST_CASE("hessian properties") {
    Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));
    PenaltyParams p = make_penalty_params(ell, 1.0);

    SUBCASE("symmetry and FD agreement") {
        DiscreteCurve c = wiggly_loop(12, 21);
        Matrix H = Matrix(hess_lagrangian(c, ell, p));
        CHECK((H - H.transpose()).norm() <= 1e-10 * std::max(1.0, H.norm()));
        double h = 1e-6;
        Matrix Hfd(24, 24);
        for (int i = 0; i < 12; ++i)
            for (int d = 0; d < 2; ++d) {
                DiscreteCurve cp = c, cm = c;
                cp.nodes(i, d) += h;
                cm.nodes(i, d) -= h;
                Vector col = flatten(grad_lagrangian(cp, ell, p)) -
                             flatten(grad_lagrangian(cm, ell, p));
                Hfd.col(i * 2 + d) = col / (2 * h);
            }
        CHECK((H - Hfd).norm() / Hfd.norm() <= 1e-4);
    }
    SUBCASE("plateau loop: Laplacian spectrum, nullity n") {
        Body disc = Body::make_ball(vec2(0, 0), 1.0);
        PenaltyParams pd = make_penalty_params(disc, 1.0);
        DiscreteCurve c = circle_curve(16, 0.3);
        Matrix H = Matrix(hess_lagrangian(c, disc, pd));
        Eigen::SelfAdjointEigenSolver<Matrix> es(H);
        int zeros = 0;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            CHECK(es.eigenvalues()(i) >= -1e-9);
            if (std::abs(es.eigenvalues()(i)) < 1e-9) ++zeros;
        }
        CHECK(zeros == 2);
    }
    SUBCASE("open-chain hessian is positive semidefinite in the plateau") {
        Body disc = Body::make_ball(vec2(0, 0), 1.0);
        PenaltyParams pd = make_penalty_params(disc, 1.0);
        DiscreteCurve c = segment_curve(12, vec2(-0.3, 0), vec2(0.3, 0));
        Matrix H = Matrix(hess_lagrangian(c, disc, pd));
        Eigen::SelfAdjointEigenSolver<Matrix> es(H);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("refinement consistency of the lagrangian") {
    Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));
    PenaltyParams p = make_penalty_params(ell, 1.0, 0.15);
    auto sample = [&](int N) {
        DiscreteCurve c;
        c.closed = true;
        c.nodes.resize(N, 2);
        for (int i = 0; i < N; ++i) {
            double t = 2 * kPi * i / N;
            c.nodes(i, 0) = 1.83 * std::cos(t);
            c.nodes(i, 1) = 0.91 * std::sin(t) + 0.02 * std::sin(2 * t);
        }
        return lagrangian(c, ell, p);
    };
    double ref = sample(4096);
    std::vector<double> errs;
    for (int N : {32, 64, 128, 256}) errs.push_back(std::abs(sample(N) - ref));
    // Log-log slope across dyadic refinement must be near second order.
    for (size_t k = 0; k + 1 < errs.size(); ++k) {
        double order = std::log2(errs[k] / errs[k + 1]);
        CHECK(order >= 1.8);
    }
}

TEST_CASE("invariances") {
    SUBCASE("gradient annihilates translations of plateau loops") {
        Body disc = Body::make_ball(vec2(0, 0), 1.0);
        PenaltyParams p = make_penalty_params(disc, 1.0);
        DiscreteCurve c = circle_curve(24, 0.25, 0.1, -0.05);
        CurveTangent g = grad_lagrangian(c, disc, p);
        Vector colsum = g.colwise().sum().transpose();
        CHECK(colsum.norm() <= 1e-10);
    }
    SUBCASE("energy and length are rigid-motion invariant") {
        DiscreteCurve c = wiggly_loop(32, 77);
        double th = 0.7;
        Matrix R(2, 2);
        R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        DiscreteCurve moved = c;
        moved.nodes = (c.nodes * R.transpose()).rowwise() +
                      Eigen::RowVector2d(0.17, -0.33);
        CHECK(energy(moved) == doctest::Approx(energy(c)).epsilon(1e-12));
        CHECK(length(moved) == doctest::Approx(length(c)).epsilon(1e-12));
    }
    SUBCASE("lagrangian invariant under rotations preserving the body") {
        Body disc = Body::make_ball(vec2(0, 0), 1.0);
        PenaltyParams p = make_penalty_params(disc, 1.0);
        DiscreteCurve c = circle_curve(32, 0.85, 0.02, 0.0);
        double th = 1.1;
        Matrix R(2, 2);
        R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        DiscreteCurve moved = c;
        moved.nodes = c.nodes * R.transpose();
        CHECK(lagrangian(moved, disc, p) ==
              doctest::Approx(lagrangian(c, disc, p)).epsilon(1e-11));
    }
}

TEST_CASE("flatten round trip and validation") {
    DiscreteCurve c = wiggly_loop(16, 5);
    Vector v = flatten(c.nodes);
    CHECK((unflatten(v, 16, 2) - c.nodes).norm() == 0.0);
    CHECK_THROWS_AS(unflatten(v, 8, 3), std::invalid_argument);

    DiscreteCurve bad;
    bad.closed = true;
    bad.nodes = Matrix::Zero(7, 2);
    CHECK_THROWS_AS(energy(bad), std::invalid_argument);
    bad.nodes = Matrix::Zero(8, 2);
    bad.nodes(3, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(length(bad), std::invalid_argument);
}
