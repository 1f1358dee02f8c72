#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "billiards/geometry.hpp"

using namespace billiards;

namespace {

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

Vector vec3(double x, double y, double z) {
    Vector v(3);
    v << x, y, z;
    return v;
}

// Shared property pack: projection geometry must be internally consistent
// regardless of body kind.
void check_projection_consistency(const Body& body, const Vector& q,
                                  double tol) {
    Projection pr = body.project(q);
    CHECK(pr.normal.norm() == doctest::Approx(1.0).epsilon(1e-9));
    // q sits on the inward normal ray through the foot point.
    Vector reconstructed = pr.point - pr.signed_distance * pr.normal;
    CHECK((reconstructed - q).norm() <= tol * body.length_scale());
    // The foot point lies on the boundary.
    CHECK(std::abs(body.signed_distance(pr.point)) <=
          tol * body.length_scale());
    // Distance value matches the foot point.
    CHECK(std::abs((q - pr.point).norm() - std::abs(pr.signed_distance)) <=
          tol * body.length_scale());
    // The supporting halfplane at the foot certifies the distance for
    // exterior points and is respected by interior ones.
    double margin = pr.normal.dot(q - pr.point);
    CHECK(margin == doctest::Approx(-pr.signed_distance).epsilon(1e-6));
}

std::vector<Vector> sample_points(const Body& body, int count,
                                  unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.3, 1.3);
    std::vector<Vector> out;
    Vector c = body.reference_point();
    for (int i = 0; i < count; ++i) {
        Vector q(body.dim());
        for (int j = 0; j < body.dim(); ++j)
            q(j) = c(j) + u(rng) * body.length_scale();
        out.push_back(q);
    }
    return out;
}

} // namespace

TEST_CASE("ball support and projection") {
    Body ball = Body::make_ball(vec2(0.3, -0.2), 1.25);

    CHECK(ball.support(vec2(1, 0)) == doctest::Approx(1.55).epsilon(1e-12));
    CHECK(ball.support(vec2(0, 2)) == doctest::Approx(2 * (-0.2 + 1.25)).epsilon(1e-12));
    Vector sp = ball.support_point(vec2(0, 1));
    CHECK(sp(0) == doctest::Approx(0.3));
    CHECK(sp(1) == doctest::Approx(1.05));

    CHECK(ball.signed_distance(vec2(0.3, -0.2)) == doctest::Approx(1.25));
    CHECK(ball.signed_distance(vec2(0.3, 1.05)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ball.signed_distance(vec2(0.3, 2.05)) == doctest::Approx(-1.0));
    CHECK(ball.contains(vec2(1.0, 0.0)));
    CHECK_FALSE(ball.contains(vec2(2.0, 0.0)));

    for (const Vector& q : sample_points(ball, 200, 11))
        check_projection_consistency(ball, q, 1e-10);
}

TEST_CASE("ellipsoid projection matches hand-solved cases") {
    Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));

    SUBCASE("interior axis point projects off-axis") {
        // Foot solves the constrained nearest-point system with the
        // multiplier pinned at the short-axis value.
        Projection pr = ell.project(vec2(0.5, 0));
        CHECK(pr.signed_distance ==
              doctest::Approx(std::sqrt(33.0) / 6.0).epsilon(1e-12));
        CHECK(pr.point(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
        CHECK(std::abs(pr.point(1)) ==
              doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-10));
    }
    SUBCASE("exterior axis point") {
        CHECK(ell.signed_distance(vec2(3, 0)) == doctest::Approx(-1.0).epsilon(1e-12));
        Projection pr = ell.project(vec2(3, 0));
        CHECK(pr.point(0) == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(pr.normal(0) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("short-axis interior point") {
        CHECK(ell.signed_distance(vec2(0, 0.5)) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("center") {
        CHECK(ell.signed_distance(vec2(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("generic points are consistent") {
        for (const Vector& q : sample_points(ell, 400, 23))
            check_projection_consistency(ell, q, 1e-9);
    }
    SUBCASE("support point attains the support value") {
        for (const Vector& u : direction_grid(2, 64)) {
            CHECK(ell.support_point(u).dot(u) ==
                  doctest::Approx(ell.support(u)).epsilon(1e-12));
        }
    }
}

TEST_CASE("triaxial ellipsoid projection") {
    Body ell = Body::make_ellipsoid(vec3(0.1, -0.4, 0.2), vec3(1.5, 1.0, 0.75));
    for (const Vector& q : sample_points(ell, 400, 31))
        check_projection_consistency(ell, q, 1e-9);
    // Interior line of centers: nearest feet escape toward the short axis.
    Projection pr = ell.project(vec3(0.1, -0.4, 0.2));
    CHECK(pr.signed_distance == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("p-norm ball support and projection") {
    Body pb = Body::make_pnorm_ball(vec2(0, 0), vec2(1, 1), 4);

    SUBCASE("support values") {
        CHECK(pb.support(vec2(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
        // Dual exponent 4/3; diagonal support is 2^(3/4).
        CHECK(pb.support(vec2(1, 1)) ==
              doctest::Approx(std::pow(2.0, 0.75)).epsilon(1e-12));
        Vector sp = pb.support_point(vec2(1, 1));
        CHECK(sp(0) == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));
        CHECK(sp(1) == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));
    }
    SUBCASE("axis projections") {
        CHECK(pb.signed_distance(vec2(2, 0)) == doctest::Approx(-1.0).epsilon(1e-10));
        CHECK(pb.signed_distance(vec2(0, -3)) == doctest::Approx(-2.0).epsilon(1e-10));
    }
    SUBCASE("random points are consistent") {
        for (const Vector& q : sample_points(pb, 300, 47))
            check_projection_consistency(pb, q, 1e-8);
    }
    SUBCASE("scaled and shifted") {
        Body pb2 = Body::make_pnorm_ball(vec2(0.2, -0.1), vec2(1.5, 1.0), 6);
        for (const Vector& q : sample_points(pb2, 300, 53))
            check_projection_consistency(pb2, q, 1e-8);
    }
    SUBCASE("exponent 2 reduces to the ellipsoid") {
        Body pb2 = Body::make_pnorm_ball(vec2(0.1, 0.2), vec2(2, 1), 2);
        Body ell = Body::make_ellipsoid(vec2(0.1, 0.2), vec2(2, 1));
        for (const Vector& q : sample_points(ell, 100, 59)) {
            CHECK(pb2.signed_distance(q) ==
                  doctest::Approx(ell.signed_distance(q)).epsilon(1e-10));
        }
    }
}

TEST_CASE("3d p-norm ball projection") {
    Body pb = Body::make_pnorm_ball(vec3(0, 0, 0), vec3(1.2, 1.0, 0.8), 4);
    for (const Vector& q : sample_points(pb, 200, 61))
        check_projection_consistency(pb, q, 1e-8);
}

TEST_CASE("minkowski sum") {
    Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));
    Body ball = Body::make_ball(vec2(0, 0), 0.5);
    Body sum = minkowski_sum(ell, ball);

    SUBCASE("support is additive") {
        for (const Vector& u : direction_grid(2, 64)) {
            CHECK(sum.support(u) ==
                  doctest::Approx(ell.support(u) + ball.support(u)).epsilon(1e-12));
            CHECK(sum.support_point(u).dot(u) ==
                  doctest::Approx(sum.support(u)).epsilon(1e-12));
        }
    }
    SUBCASE("outer parallel body distances") {
        // Adding a ball of radius r shifts interior boundary distances by r.
        CHECK(sum.signed_distance(vec2(0, 0)) == doctest::Approx(1.5).epsilon(1e-9));
        CHECK(sum.signed_distance(vec2(2, 0)) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(sum.signed_distance(vec2(0.5, 0)) ==
              doctest::Approx(std::sqrt(33.0) / 6.0 + 0.5).epsilon(1e-9));
        CHECK(sum.signed_distance(vec2(3.0, 0)) == doctest::Approx(-0.5).epsilon(1e-7));
    }
    SUBCASE("random points are consistent") {
        for (const Vector& q : sample_points(sum, 200, 67))
            check_projection_consistency(sum, q, 1e-7);
    }
    SUBCASE("nested sums flatten") {
        Body sum2 = minkowski_sum(sum, ball);
        const auto& parts = std::get<MinkowskiSum>(sum2.kind()).parts;
        CHECK(parts.size() == 3);
        CHECK(sum2.signed_distance(vec2(0, 0)) == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("3d minkowski sum projection") {
    Body ell = Body::make_ellipsoid(vec3(0, 0, 0), vec3(1.5, 1.0, 0.8));
    Body ball = Body::make_ball(vec3(0, 0, 0), 0.4);
    Body sum = minkowski_sum(ell, ball);
    CHECK(sum.signed_distance(vec3(0, 0, 0)) == doctest::Approx(1.2).epsilon(1e-8));
    CHECK(sum.signed_distance(vec3(1.5, 0, 0)) == doctest::Approx(0.4).epsilon(1e-7));
    for (const Vector& q : sample_points(sum, 60, 71))
        check_projection_consistency(sum, q, 2e-6);
}

TEST_CASE("support function homogeneity") {
    std::vector<Body> zoo;
    zoo.push_back(Body::make_ball(vec2(0.3, -0.2), 1.25));
    zoo.push_back(Body::make_ellipsoid(vec2(0, 0), vec2(2, 1)));
    zoo.push_back(Body::make_pnorm_ball(vec2(0, 0), vec2(1.5, 1.0), 4));
    zoo.push_back(minkowski_sum(zoo[1], Body::make_ball(vec2(0, 0), 0.5)));
    for (const Body& body : zoo) {
        for (const Vector& u : direction_grid(2, 32)) {
            double h = body.support(u);
            CHECK(body.support(3.7 * u) == doctest::Approx(3.7 * h).epsilon(1e-12));
            // Support point is scale invariant.
            CHECK((body.support_point(3.7 * u) - body.support_point(u)).norm() <=
                  1e-10);
        }
    }
}

TEST_CASE("support hessian") {
    SUBCASE("availability") {
        CHECK(Body::make_ball(vec2(0, 0), 1).support_hessian_available());
        CHECK(Body::make_ellipsoid(vec2(0, 0), vec2(2, 1)).support_hessian_available());
        CHECK_FALSE(Body::make_pnorm_ball(vec2(0, 0), vec2(1, 1), 4)
                        .support_hessian_available());
        CHECK(Body::make_pnorm_ball(vec2(0, 0), vec2(1, 1), 2)
                  .support_hessian_available());
    }
    SUBCASE("matches finite differences") {
        Body ell = Body::make_ellipsoid(vec2(0.1, 0.2), vec2(2, 1));
        Vector u = vec2(0.6, -0.8);
        Matrix H = ell.support_hessian(u);
        double h = 1e-6;
        for (int i = 0; i < 2; ++i) {
            Vector e = Vector::Zero(2);
            e(i) = h;
            Vector g1 = ell.support_point(u + e);
            Vector g0 = ell.support_point(u - e);
            Vector col = (g1 - g0) / (2 * h);
            CHECK((H.col(i) - col).norm() <= 1e-5);
        }
    }
    SUBCASE("annihilates the direction (degree-zero homogeneity)") {
        Body ball = Body::make_ball(vec2(0.3, -0.2), 1.25);
        Vector u = vec2(0.6, -0.8);
        CHECK((ball.support_hessian(u) * u).norm() <= 1e-12);
    }
}

TEST_CASE("inradius and width") {
    SUBCASE("ball") {
        Body ball = Body::make_ball(vec2(0.3, -0.2), 1.25);
        InradiusReport r = inradius(ball);
        CHECK(r.radius == doctest::Approx(1.25).epsilon(1e-8));
        CHECK((r.center - vec2(0.3, -0.2)).norm() <= 1e-6);
        CHECK(width(ball).width == doctest::Approx(2.5).epsilon(1e-10));
    }
    SUBCASE("ellipse") {
        Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));
        InradiusReport r = inradius(ell);
        CHECK(r.radius == doctest::Approx(1.0).epsilon(1e-8));
        SlabReport s = width(ell);
        CHECK(s.width == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(std::abs(s.direction(1)) == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("p-ball") {
        Body pb = Body::make_pnorm_ball(vec2(0, 0), vec2(1.5, 1.0), 4);
        CHECK(inradius(pb).radius == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(width(pb).width == doctest::Approx(2.0).epsilon(1e-8));
    }
    SUBCASE("sum") {
        Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));
        Body sum = minkowski_sum(ell, Body::make_ball(vec2(0, 0), 0.5));
        CHECK(inradius(sum).radius == doctest::Approx(1.5).epsilon(1e-7));
        CHECK(width(sum).width == doctest::Approx(3.0).epsilon(1e-9));
    }
    SUBCASE("3d ellipsoid") {
        Body ell = Body::make_ellipsoid(vec3(0, 0, 0), vec3(1.5, 1.0, 0.8));
        CHECK(inradius(ell).radius == doctest::Approx(0.8).epsilon(1e-6));
        CHECK(width(ell).width == doctest::Approx(1.6).epsilon(1e-7));
    }
}

TEST_CASE("boundary normals") {
    Body ell = Body::make_ellipsoid(vec2(0, 0), vec2(2, 1));
    Vector n = ell.boundary_normal(vec2(2, 0));
    CHECK(n(0) == doctest::Approx(1.0).epsilon(1e-10));
    n = ell.boundary_normal(vec2(0, -1));
    CHECK(n(1) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK_THROWS_AS(ell.boundary_normal(vec2(0, 0)), std::invalid_argument);
}

TEST_CASE("direction grid") {
    auto g2 = direction_grid(2, 64);
    CHECK(g2.size() == 64 + 4);
    auto g3 = direction_grid(3, 128);
    CHECK(g3.size() == 128 + 6);
    for (const auto& u : g2) CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& u : g3) CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("construction validation") {
    CHECK_THROWS_AS(Body::make_ball(vec2(0, 0), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(Body::make_ellipsoid(vec2(0, 0), vec2(1, -1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(Body::make_pnorm_ball(vec2(0, 0), vec2(1, 1), 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(Body::make_pnorm_ball(vec2(0, 0), vec2(1, 1), 0),
                    std::invalid_argument);
    std::vector<Body> mixed;
    mixed.push_back(Body::make_ball(vec2(0, 0), 1.0));
    mixed.push_back(Body::make_ball(vec3(0, 0, 0), 1.0));
    CHECK_THROWS_AS(Body::make_sum(std::move(mixed)), std::invalid_argument);

    Body ball = Body::make_ball(vec2(0, 0), 1.0);
    CHECK_THROWS_AS(ball.support(vec3(1, 0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(ball.support(vec2(0, 0)), std::invalid_argument);
}
