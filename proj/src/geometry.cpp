#include "billiards/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "billiards/small_lp.hpp"

namespace billiards {
namespace {

constexpr double kPi = std::numbers::pi;

Vector unit2(double theta) {
    Vector u(2);
    u << std::cos(theta), std::sin(theta);
    return u;
}

// Golden-section minimization; only needs function values, so it tolerates
// objectives that are merely C^1 (p-norm support functions at axis
// directions).
template <class F>
double golden_min(F&& f, double a, double b, int iters = 90) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iters && (b - a) > 1e-14; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

Projection project_ball(const Ball& k, const Vector& q) {
    Vector r = q - k.center;
    double d = r.norm();
    Projection out;
    if (d < 1e-14 * std::max(1.0, k.radius)) {
        out.normal = Vector::Zero(q.size());
        out.normal(0) = 1.0;
    } else {
        out.normal = r / d;
    }
    out.point = k.center + k.radius * out.normal;
    out.signed_distance = k.radius - d;
    return out;
}

// Nearest boundary point of an axis-aligned ellipsoid via the standard
// one-parameter Lagrange equation: x_i = a_i^2 y_i / (a_i^2 + t) with
// G(t) = sum (a_i y_i / (a_i^2 + t))^2 - 1 = 0, G strictly decreasing on
// (-a_J^2, inf), a_J the smallest axis with y_i != 0. Interior queries with
// zero coordinates on small axes admit extra candidates at t = -a_i^2
// (feet off the coordinate plane); cf. Eberly, "Distance from a point to
// an ellipse, an ellipsoid, or a hyperellipsoid".
Projection project_ellipsoid_centered(const Vector& axes, const Vector& y) {
    const int n = static_cast<int>(axes.size());
    const double scale = axes.maxCoeff();
    const bool inside = [&] {
        double s = 0;
        for (int i = 0; i < n; ++i) s += (y(i) / axes(i)) * (y(i) / axes(i));
        return s < 1.0;
    }();

    std::vector<int> live; // coordinates with y_i != 0
    for (int i = 0; i < n; ++i)
        if (std::abs(y(i)) > 1e-15 * scale) live.push_back(i);

    Vector best_x;
    double best_d2 = std::numeric_limits<double>::infinity();

    if (live.empty()) {
        // Center: nearest feet lie on the shortest axis.
        int j = 0;
        axes.minCoeff(&j);
        best_x = Vector::Zero(n);
        best_x(j) = axes(j);
        best_d2 = axes(j) * axes(j);
    } else {
        double aJ = std::numeric_limits<double>::infinity();
        for (int i : live) aJ = std::min(aJ, axes(i));
        auto G = [&](double t) {
            double s = 0;
            for (int i : live) {
                double w = axes(i) * y(i) / (axes(i) * axes(i) + t);
                s += w * w;
            }
            return s - 1.0;
        };
        double cnorm = 0;
        for (int i : live) cnorm += axes(i) * y(i) * axes(i) * y(i);
        cnorm = std::sqrt(cnorm);
        double lo = -aJ * aJ, hi = -aJ * aJ + cnorm;
        // G(lo+) = +inf, G(hi) <= 0; bisection with Newton polish.
        double t = hi;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (G(mid) > 0) lo = mid; else hi = mid;
            if (hi - lo < 1e-16 * (std::abs(hi) + scale * scale)) break;
        }
        t = 0.5 * (lo + hi);
        for (int it = 0; it < 60; ++it) {
            double g = G(t), dg = 0;
            for (int i : live) {
                double a2 = axes(i) * axes(i);
                double w = axes(i) * y(i);
                dg += -2.0 * w * w / ((a2 + t) * (a2 + t) * (a2 + t));
            }
            if (std::abs(dg) < 1e-300) break;
            double step = g / dg;
            double tn = t - step;
            if (!(tn > -aJ * aJ)) break;
            t = tn;
            if (std::abs(step) < 1e-17 * (std::abs(t) + scale * scale)) break;
        }
        Vector x = Vector::Zero(n);
        for (int i : live)
            x(i) = axes(i) * axes(i) * y(i) / (axes(i) * axes(i) + t);
        best_x = x;
        best_d2 = (x - y).squaredNorm();

        if (inside) {
            // Feet escaping into a zeroed coordinate plane, possible only
            // for axes strictly shorter than every live axis.
            std::vector<double> vals;
            for (int i = 0; i < n; ++i) {
                if (std::abs(y(i)) > 1e-15 * scale) continue;
                if (axes(i) < aJ * (1.0 - 1e-14)) vals.push_back(axes(i));
            }
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (double v : vals) {
                double tt = -v * v;
                Vector x2 = Vector::Zero(n);
                double T = 0;
                bool ok = true;
                for (int i : live) {
                    double den = axes(i) * axes(i) + tt;
                    if (den <= 0) { ok = false; break; }
                    x2(i) = axes(i) * axes(i) * y(i) / den;
                    T += (x2(i) / axes(i)) * (x2(i) / axes(i));
                }
                if (!ok || T >= 1.0) continue;
                int j = -1;
                for (int i = 0; i < n; ++i) {
                    if (std::abs(y(i)) <= 1e-15 * scale &&
                        std::abs(axes(i) - v) <= 1e-14 * scale) { j = i; break; }
                }
                if (j < 0) continue;
                x2(j) = v * std::sqrt(1.0 - T);
                double d2 = (x2 - y).squaredNorm();
                if (d2 < best_d2) { best_d2 = d2; best_x = x2; }
            }
        }
    }

    Projection out;
    out.point = best_x;
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = best_x(i) / (axes(i) * axes(i));
    out.normal = w / w.norm();
    double d = std::sqrt(best_d2);
    out.signed_distance = inside ? d : -d;
    return out;
}

Projection project_ellipsoid(const Vector& center, const Vector& axes,
                             const Vector& q) {
    Projection out = project_ellipsoid_centered(axes, q - center);
    out.point += center;
    return out;
}

struct PBallFrame {
    const Vector& center;
    const Vector& scales;
    int p;

    double implicit(const Vector& x) const {
        double s = 0;
        for (int i = 0; i < x.size(); ++i)
            s += std::pow((x(i) - center(i)) / scales(i), p);
        return s - 1.0;
    }
    Vector gradient(const Vector& x) const {
        Vector g(x.size());
        for (int i = 0; i < x.size(); ++i) {
            double u = (x(i) - center(i)) / scales(i);
            g(i) = p * std::pow(u, p - 1) / scales(i);
        }
        return g;
    }
    Matrix hessian(const Vector& x) const {
        Matrix h = Matrix::Zero(x.size(), x.size());
        for (int i = 0; i < x.size(); ++i) {
            double u = (x(i) - center(i)) / scales(i);
            h(i, i) = p * (p - 1) * std::pow(u, p - 2) / (scales(i) * scales(i));
        }
        return h;
    }
    // Boundary point hit by the ray center + s * dir (closed form).
    Vector ray_boundary(const Vector& dir) const {
        double s = 0;
        for (int i = 0; i < dir.size(); ++i)
            s += std::pow(std::abs(dir(i)) / scales(i), p);
        return center + dir / std::pow(s, 1.0 / p);
    }
};

// Nearest point on the p-ball boundary by damped Lagrange-Newton on the
// first-order system of min |x-q|^2 s.t. F(x)=0, polished from a handful
// of deterministic starts (ray hit, axis feet, a coarse direction fan).
// The support chart is not C^2 at axis directions for p > 2, so working
// with the smooth implicit polynomial is the reliable route.
Projection project_pball(const PNormBall& k, const Vector& q) {
    const int n = static_cast<int>(q.size());
    PBallFrame f{k.center, k.scales, k.exponent};
    const double scale = k.scales.maxCoeff() + q.norm();

    std::vector<Vector> starts;
    Vector rel = q - k.center;
    if (rel.norm() > 1e-13 * scale) starts.push_back(f.ray_boundary(rel));
    for (int i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e(i) = 1.0;
        starts.push_back(k.center + k.scales(i) * e);
        starts.push_back(k.center - k.scales(i) * e);
    }
    for (const Vector& d : direction_grid(n, n == 2 ? 24 : 60))
        starts.push_back(f.ray_boundary(d));

    std::sort(starts.begin(), starts.end(),
              [&](const Vector& a, const Vector& b) {
                  return (a - q).squaredNorm() < (b - q).squaredNorm();
              });

    Vector best_x;
    double best_d = std::numeric_limits<double>::infinity();
    int polished = 0;
    for (const Vector& x0 : starts) {
        if (polished >= 4) break;
        ++polished;
        Vector x = x0;
        Vector g = f.gradient(x);
        double mu = -(x - q).dot(g) / std::max(g.squaredNorm(), 1e-300);
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            g = f.gradient(x);
            Vector r1 = x - q + mu * g;
            double r2 = f.implicit(x);
            double res = std::sqrt(r1.squaredNorm() + r2 * r2);
            if (res <= 1e-13 * scale) { ok = true; break; }
            Matrix J(n + 1, n + 1);
            J.topLeftCorner(n, n) = Matrix::Identity(n, n) + mu * f.hessian(x);
            J.topRightCorner(n, 1) = g;
            J.bottomLeftCorner(1, n) = g.transpose();
            J(n, n) = 0.0;
            Vector rhs(n + 1);
            rhs.head(n) = -r1;
            rhs(n) = -r2;
            Vector step = J.fullPivLu().solve(rhs);
            double alpha = 1.0;
            for (int ls = 0; ls < 30; ++ls) {
                Vector xn = x + alpha * step.head(n);
                double mun = mu + alpha * step(n);
                Vector r1n = xn - q + mun * f.gradient(xn);
                double r2n = f.implicit(xn);
                double resn = std::sqrt(r1n.squaredNorm() + r2n * r2n);
                if (resn <= (1.0 - 1e-4 * alpha) * res) {
                    x = xn;
                    mu = mun;
                    break;
                }
                alpha *= 0.5;
                if (ls == 29) it = 60; // stalled
            }
        }
        if (ok) {
            double d = (x - q).norm();
            if (d < best_d) { best_d = d; best_x = x; }
        }
    }
    if (!std::isfinite(best_d))
        throw NumericalFailure("p-ball projection did not converge");

    Projection out;
    out.point = best_x;
    Vector g = f.gradient(best_x);
    out.normal = g / g.norm();
    out.signed_distance = f.implicit(q) < 0 ? best_d : -best_d;
    return out;
}

Vector tangent_of(const Vector& u, int which) {
    // Orthonormal completion of a unit vector in R^3.
    Vector a = Vector::Zero(3);
    int k = 0;
    u.cwiseAbs().minCoeff(&k);
    a(k) = 1.0;
    Vector t1 = (a - a.dot(u) * u).normalized();
    if (which == 0) return t1;
    Vector t2(3);
    t2 << u(1) * t1(2) - u(2) * t1(1), u(2) * t1(0) - u(0) * t1(2),
        u(0) * t1(1) - u(1) * t1(0);
    return t2;
}

// Projected-gradient descent of f over the unit sphere starting from u,
// where grad(u) returns the full-space gradient of the 1-homogeneous
// extension (exact for support-type objectives: grad = support_point - q).
// Tightens a grid/zoom minimizer from ~sqrt(tol) to ~tol in direction.
template <class F, class G>
Vector sphere_polish(F&& f, G&& grad, Vector u, double gtol) {
    double fu = f(u);
    for (int it = 0; it < 400; ++it) {
        Vector g = grad(u);
        Vector gt = g - g.dot(u) * u;
        double gn = gt.norm();
        if (gn <= gtol) break;
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            Vector un = (u - step * gt).normalized();
            double fn = f(un);
            if (fn < fu - 1e-4 * step * gn * gn) {
                u = un;
                fu = fn;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return u;
}

} // namespace

Body::Body(int dim, double tolerance, Kind kind)
    : dim_(dim), tolerance_(tolerance), length_scale_(1.0),
      kind_(std::move(kind)) {
    if (dim_ < 2) throw std::invalid_argument("body dimension must be >= 2");
    if (!(tolerance_ > 0))
        throw std::invalid_argument("body tolerance must be positive");
    double ls = 0;
    for (int i = 0; i < dim_; ++i) {
        Vector e = Vector::Zero(dim_);
        e(i) = 1.0;
        ls = std::max({ls, std::abs(support(e)), std::abs(support(-e))});
    }
    length_scale_ = std::max(ls, 1e-12);
}

Body Body::make_ball(Vector center, double radius, double tolerance) {
    if (!(radius > 0))
        throw std::invalid_argument("ball radius must be positive");
    int n = static_cast<int>(center.size());
    return Body(n, tolerance, Ball{std::move(center), radius});
}

Body Body::make_ellipsoid(Vector center, Vector semi_axes, double tolerance) {
    if (center.size() != semi_axes.size())
        throw std::invalid_argument("ellipsoid center/axes size mismatch");
    if (!(semi_axes.minCoeff() > 0))
        throw std::invalid_argument("ellipsoid semi-axes must be positive");
    int n = static_cast<int>(center.size());
    return Body(n, tolerance, Ellipsoid{std::move(center), std::move(semi_axes)});
}

Body Body::make_pnorm_ball(Vector center, Vector scales, int exponent,
                           double tolerance) {
    if (center.size() != scales.size())
        throw std::invalid_argument("p-ball center/scales size mismatch");
    if (!(scales.minCoeff() > 0))
        throw std::invalid_argument("p-ball scales must be positive");
    if (exponent < 2 || exponent % 2 != 0)
        throw std::invalid_argument("p-ball exponent must be even and >= 2");
    int n = static_cast<int>(center.size());
    return Body(n, tolerance,
                PNormBall{std::move(center), std::move(scales), exponent});
}

Body Body::make_sum(std::vector<Body> parts, double tolerance) {
    if (parts.size() < 2)
        throw std::invalid_argument("minkowski sum needs at least two parts");
    int n = parts.front().dim();
    double tol = tolerance;
    std::vector<Body> flat;
    for (auto& p : parts) {
        if (p.dim() != n)
            throw std::invalid_argument("minkowski sum dimension mismatch");
        tol = std::min(tol, p.tolerance());
        if (auto* s = std::get_if<MinkowskiSum>(&p.kind_)) {
            for (auto& inner : s->parts) flat.push_back(std::move(inner));
        } else {
            flat.push_back(std::move(p));
        }
    }
    return Body(n, tol, MinkowskiSum{std::move(flat)});
}

void Body::check_dim(const Vector& v, const char* what) const {
    if (v.size() != dim_)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

double Body::support(const Vector& v) const {
    check_dim(v, "support");
    if (v.norm() < 1e-30)
        throw std::invalid_argument("support: zero direction");
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return k.center.dot(v) + k.radius * v.norm();
            } else if constexpr (std::is_same_v<T, Ellipsoid>) {
                double s = 0;
                for (int i = 0; i < dim_; ++i)
                    s += k.semi_axes(i) * v(i) * k.semi_axes(i) * v(i);
                return k.center.dot(v) + std::sqrt(s);
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                // Dual norm: h(v) = || s .* v ||_{p/(p-1)}.
                double qexp = double(k.exponent) / double(k.exponent - 1);
                double s = 0;
                for (int i = 0; i < dim_; ++i)
                    s += std::pow(std::abs(k.scales(i) * v(i)), qexp);
                return k.center.dot(v) + std::pow(s, 1.0 / qexp);
            } else {
                double s = 0;
                for (const auto& part : k.parts) s += part.support(v);
                return s;
            }
        },
        kind_);
}

Vector Body::support_point(const Vector& v) const {
    check_dim(v, "support_point");
    if (v.norm() < 1e-30)
        throw std::invalid_argument("support_point: zero direction");
    return std::visit(
        [&](const auto& k) -> Vector {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return k.center + k.radius * v.normalized();
            } else if constexpr (std::is_same_v<T, Ellipsoid>) {
                Vector av(dim_);
                for (int i = 0; i < dim_; ++i)
                    av(i) = k.semi_axes(i) * k.semi_axes(i) * v(i);
                return k.center + av / std::sqrt(av.dot(v));
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                double qexp = double(k.exponent) / double(k.exponent - 1);
                double s = 0;
                for (int i = 0; i < dim_; ++i)
                    s += std::pow(std::abs(k.scales(i) * v(i)), qexp);
                double D = std::pow(s, 1.0 / qexp);
                Vector x(dim_);
                for (int i = 0; i < dim_; ++i) {
                    double w = k.scales(i) * v(i);
                    double mag = std::pow(std::abs(w) / D, qexp - 1.0);
                    x(i) = k.center(i) +
                           k.scales(i) * (w >= 0 ? mag : -mag);
                }
                return x;
            } else {
                Vector s = Vector::Zero(dim_);
                for (const auto& part : k.parts) s += part.support_point(v);
                return s;
            }
        },
        kind_);
}

bool Body::support_hessian_available() const {
    return std::visit(
        [&](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Ball>) return true;
            else if constexpr (std::is_same_v<T, Ellipsoid>) return true;
            else if constexpr (std::is_same_v<T, PNormBall>)
                return k.exponent == 2;
            else {
                for (const auto& part : k.parts)
                    if (!part.support_hessian_available()) return false;
                return true;
            }
        },
        kind_);
}

Matrix Body::support_hessian(const Vector& v) const {
    check_dim(v, "support_hessian");
    if (!support_hessian_available())
        throw std::invalid_argument("support hessian not available for this body");
    return std::visit(
        [&](const auto& k) -> Matrix {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Ball>) {
                Vector u = v.normalized();
                return k.radius / v.norm() *
                       (Matrix::Identity(dim_, dim_) - u * u.transpose());
            } else if constexpr (std::is_same_v<T, Ellipsoid>) {
                Matrix A = k.semi_axes.array().square().matrix().asDiagonal();
                Vector av = A * v;
                double s = std::sqrt(av.dot(v));
                return A / s - av * av.transpose() / (s * s * s);
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                Matrix A = k.scales.array().square().matrix().asDiagonal();
                Vector av = A * v;
                double s = std::sqrt(av.dot(v));
                return A / s - av * av.transpose() / (s * s * s);
            } else {
                Matrix h = Matrix::Zero(dim_, dim_);
                for (const auto& part : k.parts) h += part.support_hessian(v);
                return h;
            }
        },
        kind_);
}

Projection Body::project(const Vector& q) const {
    check_dim(q, "project");
    return std::visit(
        [&](const auto& k) -> Projection {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return project_ball(k, q);
            } else if constexpr (std::is_same_v<T, Ellipsoid>) {
                return project_ellipsoid(k.center, k.semi_axes, q);
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                if (k.exponent == 2)
                    return project_ellipsoid(k.center, k.scales, q);
                return project_pball(k, q);
            } else {
                // Signed distance of a convex body from supports alone:
                // sd(q) = min_{|u|=1} (h(u) - q.u). The minimizing u is the
                // outward normal at the nearest boundary point.
                if (dim_ == 2) {
                    auto g = [&](double th) {
                        Vector u = unit2(th);
                        return support(u) - q.dot(u);
                    };
                    int G = 48;
                    double best = 0, bestv = std::numeric_limits<double>::infinity();
                    for (int i = 0; i < G; ++i) {
                        double th = 2.0 * kPi * i / G;
                        double v = g(th);
                        if (v < bestv) { bestv = v; best = th; }
                    }
                    double span = 2.0 * kPi / G;
                    double th = golden_min(g, best - span, best + span);
                    Projection out;
                    out.normal = unit2(th);
                    out.signed_distance = g(th);
                    // Foot of q on the supporting hyperplane, not the support
                    // point: where the boundary is flat the support map turns
                    // direction rounding into a large tangential slide, while
                    // the foot stays accurate to the distance itself.
                    out.point = q + out.signed_distance * out.normal;
                    return out;
                }
                if (dim_ == 3) {
                    auto g = [&](const Vector& u) { return support(u) - q.dot(u); };
                    Vector best;
                    double bestv = std::numeric_limits<double>::infinity();
                    for (const Vector& u : direction_grid(3, 512)) {
                        double v = g(u);
                        if (v < bestv) { bestv = v; best = u; }
                    }
                    double s = 0.12;
                    for (int level = 0; level < 20; ++level) {
                        Vector t1 = tangent_of(best, 0), t2 = tangent_of(best, 1);
                        Vector cbest = best;
                        for (int a = -2; a <= 2; ++a)
                            for (int b = -2; b <= 2; ++b) {
                                if (a == 0 && b == 0) continue;
                                Vector u = (best + s * (0.5 * a * t1 + 0.5 * b * t2)).normalized();
                                double v = g(u);
                                if (v < bestv) { bestv = v; cbest = u; }
                            }
                        best = cbest;
                        s *= 0.4;
                    }
                    best = sphere_polish(
                        g, [&](const Vector& u) { return support_point(u) - q; },
                        best, 1e-12 * (length_scale_ + q.norm()));
                    Projection out;
                    out.normal = best;
                    out.signed_distance = g(best);
                    out.point = q + out.signed_distance * best;
                    return out;
                }
                throw std::invalid_argument(
                    "minkowski sum projection implemented for dim 2 and 3 only");
            }
        },
        kind_);
}

double Body::signed_distance(const Vector& q) const {
    return project(q).signed_distance;
}

Vector Body::boundary_normal(const Vector& p) const {
    check_dim(p, "boundary_normal");
    Projection pr = project(p);
    double band = std::max(1e3 * tolerance_, 1e-12) * length_scale_;
    if (std::abs(pr.signed_distance) > band)
        throw std::invalid_argument("boundary_normal: point is not on the boundary");
    return pr.normal;
}

bool Body::contains(const Vector& q) const {
    return signed_distance(q) >= 0.0;
}

Vector Body::reference_point() const {
    return std::visit(
        [&](const auto& k) -> Vector {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Ball>) return k.center;
            else if constexpr (std::is_same_v<T, Ellipsoid>) return k.center;
            else if constexpr (std::is_same_v<T, PNormBall>) return k.center;
            else {
                Vector s = Vector::Zero(dim_);
                for (const auto& part : k.parts) s += part.reference_point();
                return s;
            }
        },
        kind_);
}

std::vector<Vector> direction_grid(int dim, int count) {
    std::vector<Vector> out;
    out.reserve(count + 2 * dim);
    if (dim == 2) {
        for (int i = 0; i < count; ++i)
            out.push_back(unit2(2.0 * kPi * i / count));
    } else if (dim == 3) {
        const double ga = kPi * (3.0 - std::sqrt(5.0)); // golden angle
        for (int i = 0; i < count; ++i) {
            double z = 1.0 - (2.0 * i + 1.0) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vector u(3);
            u << r * std::cos(ga * i), r * std::sin(ga * i), z;
            out.push_back(u);
        }
    } else {
        throw std::invalid_argument("direction_grid supports dim 2 and 3");
    }
    for (int i = 0; i < dim; ++i) {
        Vector e = Vector::Zero(dim);
        e(i) = 1.0;
        out.push_back(e);
        out.push_back(-e);
    }
    return out;
}

InradiusReport inradius(const Body& body) {
    const int n = body.dim();
    const double scale = body.length_scale();
    std::vector<Vector> dirs = direction_grid(n, n == 2 ? 256 : 512);
    std::vector<double> offs;
    offs.reserve(dirs.size());
    for (const auto& u : dirs) offs.push_back(body.support(u));

    // Direction-grid Chebyshev LP, then cutting planes from the exact
    // distance oracle until the LP upper bound meets the certified value.
    Vector best_c = body.reference_point();
    double best_r = body.signed_distance(best_c);
    for (int round = 0; round < 120; ++round) {
        auto lp = max_margin(dirs, offs, 1e6 * scale);
        if (!lp.feasible)
            throw NumericalFailure("inradius LP infeasible");
        Projection pr = body.project(lp.x);
        if (pr.signed_distance > best_r) {
            best_r = pr.signed_distance;
            best_c = lp.x;
        }
        if (lp.margin - pr.signed_distance <=
            std::max(body.tolerance(), 1e-13 * scale))
            break;
        dirs.push_back(pr.normal);
        offs.push_back(body.support(pr.normal));
    }
    return {best_c, best_r};
}

SlabReport width(const Body& body) {
    const int n = body.dim();
    auto w = [&](const Vector& u) { return body.support(u) + body.support(-u); };
    SlabReport out;
    if (n == 2) {
        auto wth = [&](double th) { return w(unit2(th)); };
        int G = 512;
        double best = 0, bestv = std::numeric_limits<double>::infinity();
        for (int i = 0; i < G; ++i) {
            double th = kPi * i / G; // width is symmetric under u -> -u
            double v = wth(th);
            if (v < bestv) { bestv = v; best = th; }
        }
        double span = kPi / G;
        double th = golden_min(wth, best - span, best + span);
        out.direction = unit2(th);
    } else if (n == 3) {
        Vector best;
        double bestv = std::numeric_limits<double>::infinity();
        for (const Vector& u : direction_grid(3, 512)) {
            double v = w(u);
            if (v < bestv) { bestv = v; best = u; }
        }
        double s = 0.12;
        for (int level = 0; level < 20; ++level) {
            Vector t1 = tangent_of(best, 0), t2 = tangent_of(best, 1);
            Vector cbest = best;
            for (int a = -2; a <= 2; ++a)
                for (int b = -2; b <= 2; ++b) {
                    if (a == 0 && b == 0) continue;
                    Vector u = (best + s * (0.5 * a * t1 + 0.5 * b * t2)).normalized();
                    double v = w(u);
                    if (v < bestv) { bestv = v; cbest = u; }
                }
            best = cbest;
            s *= 0.4;
        }
        best = sphere_polish(
            w,
            [&](const Vector& u) {
                return (body.support_point(u) - body.support_point(-u)).eval();
            },
            best, 1e-11 * body.length_scale());
        out.direction = best;
    } else {
        throw std::invalid_argument("width implemented for dim 2 and 3");
    }
    out.support_pos = body.support(out.direction);
    out.support_neg = body.support(-out.direction);
    out.width = out.support_pos + out.support_neg;
    return out;
}

Body minkowski_sum(const Body& a, const Body& b) {
    std::vector<Body> parts;
    parts.push_back(a);
    parts.push_back(b);
    return Body::make_sum(std::move(parts));
}

} // namespace billiards
