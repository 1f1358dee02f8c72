#pragma once

#include "billiards/geometry.hpp"

namespace billiards {

/// Penalty configuration: delta is the truncation scale of the boundary
/// collar, epsilon the weight multiplying the barrier in the action.
struct PenaltyParams {
    double delta;
    double epsilon;
};

/// Validates and defaults the parameters for a body: delta defaults to
/// inradius/10 and must not exceed inradius/4 (keeps a barrier-free core
/// where motion is exactly straight).
PenaltyParams make_penalty_params(const Body& body, double epsilon,
                                  double delta = 0.0);

/// C^2 cutoff: identity on [0,1], constant 2 on [3,inf), monotone Hermite
/// interpolant in between (value, slope and curvature match at both knots;
/// the quintic coefficient of the interpolant vanishes, leaving a quartic).
/// Satisfies 0 <= cutoff <= 2 and 0 <= cutoff_d1 <= 1.
double cutoff(double t);
double cutoff_d1(double t);
double cutoff_d2(double t);

/// Truncated boundary distance delta * cutoff(d(q)/delta): equals d(q)
/// within the collar d <= delta, saturates at 2*delta past d >= 3*delta.
/// Throws DomainViolation when q is not strictly interior.
double truncated_distance(const Body& body, double delta, const Vector& q);

/// Barrier U = h^-2 - (2 delta)^-2 with h the truncated distance: blows up
/// at the boundary, vanishes identically at depth >= 3*delta.
double barrier_value(const Body& body, double delta, const Vector& q);
Vector barrier_gradient(const Body& body, double delta, const Vector& q);
Matrix barrier_hessian(const Body& body, double delta, const Vector& q);

/// One-projection bundle of the quantities the solver needs per node.
struct BarrierSample {
    double distance;   // d(q), distance to the boundary
    double value;      // U(q)
    Vector gradient;   // grad U(q)
};
BarrierSample barrier_sample(const Body& body, double delta, const Vector& q);

/// Hessian of the boundary distance d at an interior point, by central
/// finite differences of the projection normal. Step is scaled to stay
/// strictly interior.
Matrix distance_hessian(const Body& body, const Vector& q);

} // namespace billiards
