#include "billiards/loopspace.hpp"

#include <cmath>
#include <vector>

namespace billiards {

void validate_curve(const DiscreteCurve& c) {
    if (c.node_count() < 8)
        throw std::invalid_argument("curve needs at least 8 nodes");
    if (c.dim() < 1) throw std::invalid_argument("curve nodes have dimension 0");
    if (!c.nodes.allFinite())
        throw std::invalid_argument("curve has non-finite coordinates");
}

double energy(const DiscreteCurve& c) {
    validate_curve(c);
    const double dt = c.dt();
    double e = 0;
    for (int i = 0; i < c.segment_count(); ++i)
        e += (c.node(i + 1) - c.node(i)).squaredNorm();
    return e / (2.0 * dt);
}

double length(const DiscreteCurve& c) {
    validate_curve(c);
    double l = 0;
    for (int i = 0; i < c.segment_count(); ++i)
        l += (c.node(i + 1) - c.node(i)).norm();
    return l;
}

double node_weight(const DiscreteCurve& c, int i) {
    if (c.closed) return 1.0;
    return (i == 0 || i == c.node_count() - 1) ? 0.5 : 1.0;
}

double potential_integral(const DiscreteCurve& c, const Body& body,
                          const PenaltyParams& p) {
    validate_curve(c);
    const double dt = c.dt();
    double acc = 0;
    for (int i = 0; i < c.node_count(); ++i)
        acc += node_weight(c, i) *
               barrier_value(body, p.delta, c.node(i));
    return p.epsilon * dt * acc;
}

double lagrangian(const DiscreteCurve& c, const Body& body,
                  const PenaltyParams& p) {
    return energy(c) - potential_integral(c, body, p);
}

CurveTangent grad_lagrangian(const DiscreteCurve& c, const Body& body,
                             const PenaltyParams& p) {
    validate_curve(c);
    const int N = c.node_count();
    const int n = c.dim();
    const double dt = c.dt();
    CurveTangent g = Matrix::Zero(N, n);
    for (int i = 0; i < c.segment_count(); ++i) {
        Vector d = (c.node(i + 1) - c.node(i)) / dt;
        int j = c.closed ? (i + 1) % N : i + 1;
        g.row(i) -= d.transpose();
        g.row(j) += d.transpose();
    }
    for (int i = 0; i < N; ++i) {
        BarrierSample s = barrier_sample(body, p.delta, c.node(i));
        g.row(i) -= (p.epsilon * dt * node_weight(c, i)) * s.gradient.transpose();
    }
    return g;
}

SparseMatrix hess_lagrangian(const DiscreteCurve& c, const Body& body,
                             const PenaltyParams& p) {
    validate_curve(c);
    const int N = c.node_count();
    const int n = c.dim();
    const double dt = c.dt();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(N) * n * (n + 2));

    // Kinetic part: graph Laplacian of the segment chain, scaled by 1/dt.
    for (int i = 0; i < c.segment_count(); ++i) {
        int j = c.closed ? (i + 1) % N : i + 1;
        for (int d = 0; d < n; ++d) {
            trip.emplace_back(i * n + d, i * n + d, 1.0 / dt);
            trip.emplace_back(j * n + d, j * n + d, 1.0 / dt);
            trip.emplace_back(i * n + d, j * n + d, -1.0 / dt);
            trip.emplace_back(j * n + d, i * n + d, -1.0 / dt);
        }
    }
    // Potential part: dense n x n block per node inside the collar.
    for (int i = 0; i < N; ++i) {
        Vector q = c.node(i);
        if (body.signed_distance(q) >= 3.0 * p.delta) continue;
        Matrix h = barrier_hessian(body, p.delta, q);
        double w = p.epsilon * dt * node_weight(c, i);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                trip.emplace_back(i * n + a, i * n + b, -w * h(a, b));
    }
    SparseMatrix H(N * n, N * n);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

Vector flatten(const CurveTangent& t) {
    const int N = static_cast<int>(t.rows());
    const int n = static_cast<int>(t.cols());
    Vector v(N * n);
    for (int i = 0; i < N; ++i)
        v.segment(i * n, n) = t.row(i).transpose();
    return v;
}

CurveTangent unflatten(const Vector& v, int node_count, int dim) {
    if (v.size() != static_cast<long>(node_count) * dim)
        throw std::invalid_argument("unflatten: size mismatch");
    CurveTangent t(node_count, dim);
    for (int i = 0; i < node_count; ++i)
        t.row(i) = v.segment(i * dim, dim).transpose();
    return t;
}

} // namespace billiards
