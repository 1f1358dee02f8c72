#include "billiards/penalty.hpp"

#include <cmath>

namespace billiards {
namespace {

constexpr double kUnderflowFloor = 1e-12;

// Interior distance with the domain check shared by all barrier entry
// points. Returns the projection so callers can reuse the normal.
Projection interior_projection(const Body& body, const Vector& q) {
    Projection pr = body.project(q);
    if (!(pr.signed_distance > 0))
        throw DomainViolation("barrier evaluated outside the interior",
                              pr.signed_distance);
    return pr;
}

double checked_h(double d, double delta) {
    double h = delta * cutoff(d / delta);
    if (h < kUnderflowFloor * delta)
        throw BarrierOverflow("barrier distance below underflow floor", d);
    return h;
}

} // namespace

PenaltyParams make_penalty_params(const Body& body, double epsilon,
                                  double delta) {
    if (!(epsilon > 0))
        throw std::invalid_argument("penalty epsilon must be positive");
    double inr = inradius(body).radius;
    if (delta == 0.0) delta = inr / 10.0;
    if (!(delta > 0))
        throw std::invalid_argument("penalty delta must be positive");
    if (delta > inr / 4.0)
        throw std::invalid_argument(
            "penalty delta must be at most a quarter of the inradius");
    return {delta, epsilon};
}

double cutoff(double t) {
    if (t < 0) throw std::invalid_argument("cutoff argument must be >= 0");
    if (t <= 1.0) return t;
    if (t >= 3.0) return 2.0;
    double s = 0.5 * (t - 1.0);
    return 1.0 + 2.0 * s - 2.0 * s * s * s + s * s * s * s;
}

double cutoff_d1(double t) {
    if (t < 0) throw std::invalid_argument("cutoff argument must be >= 0");
    if (t <= 1.0) return 1.0;
    if (t >= 3.0) return 0.0;
    double s = 0.5 * (t - 1.0);
    return (1.0 - s) * (1.0 - s) * (1.0 + 2.0 * s);
}

double cutoff_d2(double t) {
    if (t < 0) throw std::invalid_argument("cutoff argument must be >= 0");
    if (t <= 1.0 || t >= 3.0) return 0.0;
    double s = 0.5 * (t - 1.0);
    return -3.0 * s * (1.0 - s);
}

double truncated_distance(const Body& body, double delta, const Vector& q) {
    if (!(delta > 0))
        throw std::invalid_argument("truncated_distance: delta must be positive");
    double d = interior_projection(body, q).signed_distance;
    return delta * cutoff(d / delta);
}

double barrier_value(const Body& body, double delta, const Vector& q) {
    if (!(delta > 0))
        throw std::invalid_argument("barrier_value: delta must be positive");
    double d = interior_projection(body, q).signed_distance;
    double h = checked_h(d, delta);
    return 1.0 / (h * h) - 1.0 / (4.0 * delta * delta);
}

BarrierSample barrier_sample(const Body& body, double delta, const Vector& q) {
    if (!(delta > 0))
        throw std::invalid_argument("barrier_sample: delta must be positive");
    Projection pr = interior_projection(body, q);
    double d = pr.signed_distance;
    BarrierSample out;
    out.distance = d;
    if (d >= 3.0 * delta) {
        // Plateau: exactly free motion, no projection-normal noise.
        out.value = 0.0;
        out.gradient = Vector::Zero(q.size());
        return out;
    }
    double h = checked_h(d, delta);
    out.value = 1.0 / (h * h) - 1.0 / (4.0 * delta * delta);
    // grad U = -2 h^-3 grad h, grad h = cutoff'(d/delta) * grad d, and
    // grad d = -normal (distance grows moving inward).
    double rp = cutoff_d1(d / delta);
    out.gradient = (2.0 * rp / (h * h * h)) * pr.normal;
    return out;
}

Vector barrier_gradient(const Body& body, double delta, const Vector& q) {
    return barrier_sample(body, delta, q).gradient;
}

Matrix distance_hessian(const Body& body, const Vector& q) {
    Projection pr = interior_projection(body, q);
    double d = pr.signed_distance;
    const int n = body.dim();
    // Central differences of grad d = -normal; step balances truncation
    // against oracle noise and must keep the stencil strictly interior.
    double step = std::min(6e-6 * body.length_scale(), 0.45 * d);
    Matrix H(n, n);
    for (int i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e(i) = step;
        Vector gp = -body.project(q + e).normal;
        Vector gm = -body.project(q - e).normal;
        H.col(i) = (gp - gm) / (2.0 * step);
    }
    return 0.5 * (H + H.transpose());
}

Matrix barrier_hessian(const Body& body, double delta, const Vector& q) {
    if (!(delta > 0))
        throw std::invalid_argument("barrier_hessian: delta must be positive");
    Projection pr = interior_projection(body, q);
    double d = pr.signed_distance;
    const int n = body.dim();
    if (d >= 3.0 * delta) return Matrix::Zero(n, n);
    double h = checked_h(d, delta);
    double rp = cutoff_d1(d / delta);
    double rpp = cutoff_d2(d / delta);
    Vector grad_d = -pr.normal;
    Vector grad_h = rp * grad_d;
    // hess U = 6 h^-4 grad_h grad_h^T - 2 h^-3 hess_h,
    // hess_h = cutoff''/delta * grad_d grad_d^T + cutoff' * hess_d.
    Matrix hess_d = distance_hessian(body, q);
    Matrix hess_h = (rpp / delta) * grad_d * grad_d.transpose() + rp * hess_d;
    double h3 = h * h * h;
    return (6.0 / (h3 * h)) * grad_h * grad_h.transpose() -
           (2.0 / h3) * hess_h;
}

} // namespace billiards
