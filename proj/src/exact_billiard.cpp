#include "billiards/exact_billiard.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "billiards/errors.hpp"

namespace billiards {
namespace {

Vector angle_dir(double a) {
    Vector u(2);
    u << std::cos(a), std::sin(a);
    return u;
}

Vector angle_tangent(double a) {
    Vector t(2);
    t << -std::sin(a), std::cos(a);
    return t;
}

// Body diameter proxy: longest antipodal support gap over a direction grid.
double diameter_of(const Body& body) {
    double best = 0;
    for (const Vector& u : direction_grid(body.dim(), 128))
        best = std::max(best, body.support(u) + body.support(-u));
    return best;
}

// Chord between the two support points with opposite normals, and its
// misalignment with the normal direction (zero at a double normal).
struct NormalChord {
    Vector p, q, w;
    double defect;
};

NormalChord normal_chord(const Body& body, const Vector& u) {
    NormalChord nc;
    nc.p = body.support_point(u);
    nc.q = body.support_point(-u);
    nc.w = nc.p - nc.q;
    nc.defect = (nc.w - nc.w.dot(u) * u).norm();
    return nc;
}

std::pair<Vector, Vector> tangent_pair(const Vector& u) {
    int k = 0;
    u.cwiseAbs().minCoeff(&k);
    Vector e = Vector::Zero(u.size());
    e(k) = 1.0;
    Vector t1 = (e - e.dot(u) * u).normalized();
    Vector t2(3);
    t2 << u(1) * t1(2) - u(2) * t1(1), u(2) * t1(0) - u(0) * t1(2),
        u(0) * t1(1) - u(1) * t1(0);
    return {t1, t2};
}

// Orthonormal tangent frame at a unit normal, n x (n-1) columns.
Matrix tangent_frame(const Vector& nu) {
    const int n = int(nu.size());
    Matrix T(n, n - 1);
    if (n == 2) {
        T(0, 0) = -nu(1);
        T(1, 0) = nu(0);
    } else {
        auto [t1, t2] = tangent_pair(nu);
        T.col(0) = t1;
        T.col(1) = t2;
    }
    return T;
}

// Newton polish of a double-normal chord in position space. The direction
// scans localize the normal to machine precision, but where the boundary is
// flat (zero curvature, e.g. the axis points of a quartic ball) the support
// point slides like the cube root of the direction rounding, tilting the
// chord against the endpoint normals by ~1e-6. The polish solves for the
// endpoints directly: boundary membership through the signed distance and
// tangential alignment of the chord with each normal. Distances and normals
// stay accurate where reconstructed projection feet do not (sum bodies
// build feet through the support map, re-amplifying direction rounding),
// so the residual never touches a projected point. The minimum-norm step
// keeps the flat-flat case, whose two alignment rows coincide, well-posed.
void polish_double_normal(const Body& body, Vector& p, Vector& q) {
    const int n = body.dim();
    const int m = n - 1;
    const double scale = body.length_scale();

    auto residual = [&](const Vector& pr, const Vector& qr) {
        Projection a = body.project(pr);
        Projection b = body.project(qr);
        Vector c = pr - qr;
        Vector r(2 + 2 * m);
        r(0) = a.signed_distance;
        r(1) = b.signed_distance;
        r.segment(2, m) = tangent_frame(a.normal).transpose() * c;
        r.segment(2 + m, m) = tangent_frame(b.normal).transpose() * c;
        return r;
    };

    Vector x(2 * n);
    x.head(n) = p;
    x.tail(n) = q;
    Vector best_x = x;
    double best = std::numeric_limits<double>::infinity();
    const double h = 1e-6 * scale;
    for (int iter = 0; iter < 40; ++iter) {
        Vector r = residual(x.head(n), x.tail(n));
        double defect = r.cwiseAbs().maxCoeff();
        if (defect < best) {
            best = defect;
            best_x = x;
        }
        if (defect <= 1e-12 * scale) break;

        Matrix J(2 * n, 2 * n);
        for (int j = 0; j < 2 * n; ++j) {
            Vector xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            J.col(j) = (residual(xp.head(n), xp.tail(n)) -
                        residual(xm.head(n), xm.tail(n))) /
                       (2 * h);
        }
        Vector step = J.completeOrthogonalDecomposition().solve(-r);
        double cap = 0.05 * scale;
        if (step.norm() > cap) step *= cap / step.norm();
        x += step;
    }
    p = best_x.head(n);
    q = best_x.tail(n);
}

} // namespace

double BouncePolygon::perimeter() const {
    double total = 0;
    for (size_t i = 0; i < points.size(); ++i)
        total += (points[(i + 1) % points.size()] - points[i]).norm();
    return total;
}

Vector reflect(const Vector& v, const Vector& nu) {
    if (std::abs(nu.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("reflect: normal must be a unit vector");
    return v - 2.0 * v.dot(nu) * nu;
}

RayHit ray_exit(const Body& body, const Vector& q, const Vector& v) {
    if (std::abs(v.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("ray_exit: direction must be a unit vector");
    if (!(body.signed_distance(q) > 0))
        throw std::invalid_argument("ray_exit: start must be strictly interior");

    const double tol = body.tolerance() * body.length_scale();
    double hi = body.support(v) - q.dot(v); // supporting-plane flight bound
    if (!(hi > 0))
        throw NumericalFailure("ray_exit: support bound failed to bracket");
    double lo = 0.0;
    double t = hi;
    for (int it = 0; it < 200; ++it) {
        Projection pr = body.project(q + t * v);
        // Exterior-positive distance along the ray; grows with slope nu.v.
        double f = -pr.signed_distance;
        if (std::abs(f) <= tol) return {q + t * v, t};
        (f < 0 ? lo : hi) = t;
        double slope = pr.normal.dot(v);
        double next = slope > 1e-12 ? t - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
    }
    throw NumericalFailure("ray_exit: did not converge");
}

ShootResult shoot_periodic(const Body& body, int bounce_count,
                           const std::vector<double>& seed_angles) {
    if (body.dim() != 2)
        throw std::invalid_argument("shoot_periodic: planar bodies only");
    if (bounce_count < 2)
        throw std::invalid_argument("shoot_periodic: need at least 2 bounces");
    if (int(seed_angles.size()) != bounce_count)
        throw std::invalid_argument("shoot_periodic: seed size != bounce count");

    const int k = bounce_count;
    const double scale = body.length_scale();
    const double merge_tol = 1e-8 * scale;

    auto points_of = [&](const Vector& a) {
        std::vector<Vector> pts(k);
        for (int i = 0; i < k; ++i) pts[i] = body.support_point(angle_dir(a(i)));
        return pts;
    };
    // Tangential part of the velocity turning at each bounce; zero exactly
    // when the polygon obeys the reflection law (this is also the boundary
    // gradient of the perimeter, so orbits of every Morse index are roots).
    auto residual_of = [&](const Vector& a) {
        std::vector<Vector> pts = points_of(a);
        Vector F(k);
        for (int i = 0; i < k; ++i) {
            const Vector& prev = pts[(i + k - 1) % k];
            const Vector& next = pts[(i + 1) % k];
            Vector din = pts[i] - prev;
            Vector dout = next - pts[i];
            double lin = din.norm(), lout = dout.norm();
            if (lin <= merge_tol || lout <= merge_tol)
                throw SolverError(SolverError::Kind::collapsed,
                                  "bounce points merged", 0.0);
            F(i) = angle_tangent(a(i)).dot(din / lin - dout / lout);
        }
        return F;
    };

    Vector a(k);
    for (int i = 0; i < k; ++i) a(i) = seed_angles[i];
    Vector F = residual_of(a);

    int iters = 0;
    for (; iters < 200 && F.cwiseAbs().maxCoeff() > 1e-10; ++iters) {
        // Finite-difference Jacobian; pseudo-inverse tolerates the disc's
        // rotational orbit families.
        const double h = 1e-7;
        Matrix J(k, k);
        for (int j = 0; j < k; ++j) {
            Vector ap = a, am = a;
            ap(j) += h;
            am(j) -= h;
            J.col(j) = (residual_of(ap) - residual_of(am)) / (2 * h);
        }
        Vector step = J.completeOrthogonalDecomposition().solve(-F);
        bool advanced = false;
        for (double alpha = 1.0; alpha >= 1e-10; alpha *= 0.5) {
            Vector trial = a + alpha * step;
            Vector Ft = residual_of(trial);
            if (Ft.norm() < F.norm()) {
                a = trial;
                F = Ft;
                advanced = true;
                break;
            }
        }
        if (!advanced)
            throw SolverError(SolverError::Kind::diverged,
                              "shooting line search stalled", 0.0);
    }
    if (F.cwiseAbs().maxCoeff() > 1e-10)
        throw SolverError(SolverError::Kind::diverged,
                          "shooting iteration cap reached", 0.0);

    ShootResult out;
    out.iterations = iters;
    out.residuals = F.cwiseAbs();
    const double two_pi = 2 * std::numbers::pi;
    for (int i = 0; i < k; ++i) {
        double ang = std::fmod(a(i), two_pi);
        if (ang < 0) ang += two_pi;
        out.angles.push_back(ang);
    }
    out.polygon.points = points_of(a);
    out.length = out.polygon.perimeter();
    return out;
}

std::vector<DoubleNormalChord> bouncing_ball_orbits(const Body& body) {
    const int n = body.dim();
    const double diam = diameter_of(body);
    const double flat_tol = 1e-9 * diam;

    auto make_chord = [&](const Vector& u) {
        NormalChord nc = normal_chord(body, u);
        DoubleNormalChord c;
        c.p = nc.p;
        c.q = nc.q;
        polish_double_normal(body, c.p, c.q);
        c.chord = (c.p - c.q).norm();
        c.length = 2 * c.chord;
        return c;
    };

    std::vector<DoubleNormalChord> found;
    if (n == 2) {
        // Signed misalignment psi(theta) = tangent . chord has period pi;
        // every sign change brackets a double normal.
        const int M = 256;
        auto psi = [&](double th) {
            Vector u = angle_dir(th);
            return angle_tangent(th).dot(normal_chord(body, u).w);
        };
        std::vector<double> v(M);
        double vmax = 0;
        for (int j = 0; j < M; ++j) {
            v[j] = psi(std::numbers::pi * j / M);
            vmax = std::max(vmax, std::abs(v[j]));
        }
        if (vmax <= flat_tol) {
            // Rotational family (a disc): one canonical representative.
            found.push_back(make_chord(angle_dir(0.0)));
            return found;
        }
        for (int j = 0; j < M; ++j) {
            double lo = std::numbers::pi * j / M;
            double hi = std::numbers::pi * (j + 1) / M;
            double flo = v[j], fhi = j + 1 < M ? v[j + 1] : v[0];
            if (flo == 0) {
                found.push_back(make_chord(angle_dir(lo)));
                continue;
            }
            if (flo * fhi >= 0) continue;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = psi(mid);
                if (fm == 0) { lo = hi = mid; break; }
                if (flo * fm < 0) hi = mid;
                else { lo = mid; flo = fm; }
            }
            found.push_back(make_chord(angle_dir(0.5 * (lo + hi))));
        }
    } else {
        // Direction-grid descent on the misalignment defect.
        std::vector<Vector> dirs = direction_grid(n, 512);
        dirs.push_back(width(body).direction);
        std::vector<std::pair<double, Vector>> ranked;
        int flat_count = 0;
        for (const Vector& u : dirs) {
            double d = normal_chord(body, u).defect;
            if (d <= flat_tol) ++flat_count;
            ranked.push_back({d, u});
        }
        if (flat_count * 2 >= int(dirs.size())) {
            Vector e1 = Vector::Zero(n);
            e1(0) = 1.0;
            found.push_back(make_chord(e1));
            return found;
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        const size_t starts = std::min<size_t>(24, ranked.size());
        for (size_t s = 0; s < starts; ++s) {
            Vector u = ranked[s].second;
            double best = normal_chord(body, u).defect;
            double radius = 0.2;
            for (int level = 0; level < 28; ++level, radius *= 0.5) {
                auto [t1, t2] = tangent_pair(u);
                Vector u_best = u;
                for (int i = -2; i <= 2; ++i)
                    for (int j = -2; j <= 2; ++j) {
                        Vector cand =
                            (u + radius * (i * t1 + j * t2) / 2.0).normalized();
                        double d = normal_chord(body, cand).defect;
                        if (d < best) { best = d; u_best = cand; }
                    }
                u = u_best;
            }
            if (best <= 1e-8 * diam) found.push_back(make_chord(u));
        }
    }

    // Deduplicate unordered endpoint pairs.
    std::vector<DoubleNormalChord> unique;
    const double same = 1e-6 * diam;
    for (const DoubleNormalChord& c : found) {
        bool dup = false;
        for (const DoubleNormalChord& u : unique) {
            double direct = (c.p - u.p).norm() + (c.q - u.q).norm();
            double swapped = (c.p - u.q).norm() + (c.q - u.p).norm();
            if (std::min(direct, swapped) <= 2 * same) { dup = true; break; }
        }
        if (!dup) unique.push_back(c);
    }
    std::sort(unique.begin(), unique.end(),
              [](const DoubleNormalChord& a, const DoubleNormalChord& b) {
                  return a.length < b.length;
              });
    return unique;
}

BilliardTrajectory polygon_trajectory(const BouncePolygon& polygon) {
    const size_t m = polygon.points.size();
    if (m < 2)
        throw std::invalid_argument("polygon_trajectory: need >= 2 points");

    BilliardTrajectory traj;
    traj.kind = BilliardTrajectory::Kind::periodic;
    std::vector<double> cum(1, 0.0);
    for (size_t i = 0; i < m; ++i) {
        const Vector& A = polygon.points[i];
        const Vector& B = polygon.points[(i + 1) % m];
        double len = (B - A).norm();
        if (len <= 0)
            throw std::invalid_argument(
                "polygon_trajectory: coincident consecutive points");
        traj.segments.push_back({A, B, (B - A) / len});
        cum.push_back(cum.back() + len);
    }
    traj.speed = cum.back(); // unit period: speed equals total length
    traj.total_length = cum.back();
    for (size_t i = 0; i < m; ++i) {
        traj.bounce_times.push_back(cum[i] / cum.back());
        traj.bounce_points.push_back(polygon.points[i]);
    }
    return traj;
}

} // namespace billiards
