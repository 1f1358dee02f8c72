#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "billiards/errors.hpp"

namespace billiards {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Body;

struct Ball {
    Vector center;
    double radius;
};

/// Axis-aligned ellipsoid, sum_i (x_i - c_i)^2 / a_i^2 <= 1.
struct Ellipsoid {
    Vector center;
    Vector semi_axes;
};

/// Scaled p-norm ball, sum_i |(x_i - c_i)/s_i|^p <= 1, p even and >= 2.
struct PNormBall {
    Vector center;
    Vector scales;
    int exponent;
};

struct MinkowskiSum {
    std::vector<Body> parts;
};

/// Nearest-boundary-point data for a query point. signed_distance is
/// positive strictly inside, zero on the boundary, negative outside;
/// normal is the outward unit normal at point.
struct Projection {
    Vector point;
    Vector normal;
    double signed_distance;
};

struct InradiusReport {
    Vector center;
    double radius;
};

struct SlabReport {
    Vector direction;       // unit minimizer of h(v) + h(-v)
    double width;
    double support_pos;     // h(direction)
    double support_neg;     // h(-direction)
};

/// Compact convex body with smooth boundary and nonempty interior.
/// All oracles (support, distance, normal) are accurate to `tolerance`.
class Body {
public:
    using Kind = std::variant<Ball, Ellipsoid, PNormBall, MinkowskiSum>;

    static constexpr double default_tolerance = 1e-9;

    static Body make_ball(Vector center, double radius,
                          double tolerance = default_tolerance);
    static Body make_ellipsoid(Vector center, Vector semi_axes,
                               double tolerance = default_tolerance);
    static Body make_pnorm_ball(Vector center, Vector scales, int exponent,
                                double tolerance = default_tolerance);
    static Body make_sum(std::vector<Body> parts,
                         double tolerance = default_tolerance);

    int dim() const { return dim_; }
    double tolerance() const { return tolerance_; }
    const Kind& kind() const { return kind_; }

    /// Characteristic length (max extent from the reference point); used to
    /// scale absolute tolerances.
    double length_scale() const { return length_scale_; }

    /// Support function h(v) = max_{x in K} <x, v>. v need not be unit but
    /// must be nonzero.
    double support(const Vector& v) const;

    /// The boundary point attaining support(v) (gradient of the support
    /// function). Unique because the body is strictly convex.
    Vector support_point(const Vector& v) const;

    /// Hessian of the support function at v (degree-0 homogeneous). Only
    /// available when the support function is twice differentiable away
    /// from 0; check support_hessian_available() first.
    bool support_hessian_available() const;
    Matrix support_hessian(const Vector& v) const;

    /// Nearest boundary point, outward normal there, and signed distance.
    Projection project(const Vector& q) const;

    /// Signed distance to the boundary: dist(q, bd K) inside, -dist(q, K)
    /// outside.
    double signed_distance(const Vector& q) const;

    /// Outward unit normal at a boundary point p. Throws
    /// std::invalid_argument when p is not on the boundary (within a small
    /// multiple of the body tolerance).
    Vector boundary_normal(const Vector& p) const;

    bool contains(const Vector& q) const;

    /// A point in the interior (center of the defining data).
    Vector reference_point() const;

private:
    Body(int dim, double tolerance, Kind kind);
    void check_dim(const Vector& v, const char* what) const;

    int dim_;
    double tolerance_;
    double length_scale_;
    Kind kind_;
};

InradiusReport inradius(const Body& body);
SlabReport width(const Body& body);
Body minkowski_sum(const Body& a, const Body& b);

/// Deterministic quasi-uniform unit directions: uniform angles for n = 2,
/// Fibonacci sphere for n = 3.
std::vector<Vector> direction_grid(int dim, int count);

} // namespace billiards
