#pragma once

#include <utility>
#include <vector>

#include "billiards/geometry.hpp"
#include "billiards/trajectory.hpp"

namespace billiards {

/// Closed cycle of boundary points, the combinatorial skeleton of a
/// piecewise-geodesic orbit.
struct BouncePolygon {
    std::vector<Vector> points; // cyclic order, on the boundary
    double perimeter() const;
};

/// Specular reflection of v in the tangent plane with unit normal nu:
/// v - 2 (v . nu) nu. Throws std::invalid_argument for a non-unit normal.
Vector reflect(const Vector& v, const Vector& nu);

struct RayHit {
    Vector point;  // first boundary intersection
    double flight; // distance from the ray origin
};

/// March a ray from a strictly interior point to the boundary: bracketed by
/// the support bound, then safeguarded Newton on the signed distance.
/// Throws std::invalid_argument on a bad start/direction, NumericalFailure
/// if the bracket cannot close.
RayHit ray_exit(const Body& body, const Vector& q, const Vector& v);

struct ShootResult {
    BouncePolygon polygon;
    std::vector<double> angles; // boundary normal angles of the bounces
    Vector residuals;           // per-bounce tangential defect
    double length = 0;
    int iterations = 0;
};

/// Planar periodic-orbit shooting: Newton on k boundary-normal angles,
/// where the bounce point with outward normal (cos a, sin a) is the support
/// point of that direction. Solves the reflection conditions (tangential
/// part of the turning at each bounce vanishes) to max residual 1e-10.
/// The angle list is cyclic and ordered, so star polygons are reachable by
/// seeding angles with the desired winding. Throws SolverError(diverged)
/// or SolverError(collapsed) when two bounce points merge.
ShootResult shoot_periodic(const Body& body, int bounce_count,
                           const std::vector<double>& seed_angles);

/// A double-normal chord: boundary points with antiparallel normals aligned
/// with the chord. Carrier of the period-two bouncing orbit of length
/// 2 * |q - p|.
struct DoubleNormalChord {
    Vector p;
    Vector q;
    double chord = 0;
    double length = 0; // orbit length, 2 * chord
};

/// All double-normal chords found by scanning normal directions (sign
/// scan + bisection in the plane, direction-grid descent in 3D), orbits
/// deduplicated by endpoint distance and sorted by length. A body whose
/// chords form a rotational family (a ball) yields one canonical
/// representative.
std::vector<DoubleNormalChord> bouncing_ball_orbits(const Body& body);

/// Wrap a bounce polygon as a unit-time, constant-speed periodic
/// trajectory (times proportional to accumulated edge length).
BilliardTrajectory polygon_trajectory(const BouncePolygon& polygon);

} // namespace billiards
