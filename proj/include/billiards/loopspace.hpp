#pragma once

#include <Eigen/Sparse>

#include "billiards/geometry.hpp"
#include "billiards/penalty.hpp"

namespace billiards {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniformly parametrized polygonal curve: a loop over S^1 when closed,
/// a path over [0,1] with free endpoints otherwise. Row i of nodes is the
/// i-th point; the time step is 1/N (closed) or 1/(N-1) (open).
struct DiscreteCurve {
    Matrix nodes; // N x n
    bool closed = true;

    int node_count() const { return static_cast<int>(nodes.rows()); }
    int dim() const { return static_cast<int>(nodes.cols()); }
    int segment_count() const { return closed ? node_count() : node_count() - 1; }
    double dt() const {
        return closed ? 1.0 / node_count() : 1.0 / (node_count() - 1);
    }
    double node_time(int i) const { return i * dt(); }
    /// Segment endpoints with cyclic wrap for closed curves.
    Vector node(int i) const {
        int N = node_count();
        return nodes.row(((i % N) + N) % N).transpose();
    }
};

/// Per-node vectors riding along a curve (variations, gradients); same
/// shape as the curve's node matrix.
using CurveTangent = Matrix;

/// Throws std::invalid_argument on malformed curves (N < 8, non-finite
/// coordinates, dimension 0).
void validate_curve(const DiscreteCurve& c);

/// Kinetic action sum |x_{i+1} - x_i|^2 / (2 dt) over segments.
double energy(const DiscreteCurve& c);

/// Polygonal length. Satisfies length^2 <= 2 * energy (Cauchy-Schwarz,
/// equality iff segments have uniform length).
double length(const DiscreteCurve& c);

/// Quadrature weight of node i in the potential term: 1 everywhere on
/// loops, trapezoidal 1/2 at free endpoints of open curves.
double node_weight(const DiscreteCurve& c, int i);

/// Penalized action: energy - epsilon * dt * sum_i w_i U(x_i).
/// Throws DomainViolation when a node leaves the interior.
double lagrangian(const DiscreteCurve& c, const Body& body,
                  const PenaltyParams& p);

/// Exact gradient of `lagrangian` in node coordinates. Row i is
/// (2x_i - x_{i-1} - x_{i+1})/dt - epsilon*dt*w_i*grad U(x_i), with
/// one-sided stencils at free endpoints (so a zero gradient enforces the
/// natural boundary condition: the discrete velocity vanishes there).
CurveTangent grad_lagrangian(const DiscreteCurve& c, const Body& body,
                             const PenaltyParams& p);

/// Exact Hessian of `lagrangian` as a sparse symmetric (cyclic)
/// block-tridiagonal matrix in flattened node coordinates (node-major:
/// entry (i, d) of the tangent sits at index i*n + d).
SparseMatrix hess_lagrangian(const DiscreteCurve& c, const Body& body,
                             const PenaltyParams& p);

/// Potential integral dt * sum_i w_i * epsilon * U(x_i) — the quantity
/// that must vanish along the continuation.
double potential_integral(const DiscreteCurve& c, const Body& body,
                          const PenaltyParams& p);

Vector flatten(const CurveTangent& t);
CurveTangent unflatten(const Vector& v, int node_count, int dim);

} // namespace billiards
