#include "billiards/saddle.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>

namespace billiards {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GradEval {
    CurveTangent grad;
    double norm;
};

// Gradient evaluation that treats leaving the domain (or hitting the
// barrier's underflow guard) as infinite merit instead of an error: the
// line search uses this to reject exterior trial curves.
std::optional<GradEval> try_grad(const DiscreteCurve& c, const Body& body,
                                 const PenaltyParams& p) {
    try {
        GradEval e;
        e.grad = grad_lagrangian(c, body, p);
        e.norm = e.grad.norm();
        return e;
    } catch (const DomainViolation&) {
        return std::nullopt;
    } catch (const BarrierOverflow&) {
        return std::nullopt;
    }
}

double max_row_norm(const Matrix& m) {
    double best = 0;
    for (int i = 0; i < m.rows(); ++i) best = std::max(best, m.row(i).norm());
    return best;
}

SparseMatrix identity_sparse(int n) {
    SparseMatrix I(n, n);
    I.setIdentity();
    return I;
}

// Kinetic-Laplacian-plus-identity preconditioner for the residual-descent
// fallback (a discrete W^{1,2} metric on tangents).
SparseMatrix kinetic_metric(const DiscreteCurve& c) {
    const int N = c.node_count();
    const int n = c.dim();
    const double dt = c.dt();
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < c.segment_count(); ++i) {
        int j = c.closed ? (i + 1) % N : i + 1;
        for (int d = 0; d < n; ++d) {
            trip.emplace_back(i * n + d, i * n + d, 1.0 / dt);
            trip.emplace_back(j * n + d, j * n + d, 1.0 / dt);
            trip.emplace_back(i * n + d, j * n + d, -1.0 / dt);
            trip.emplace_back(j * n + d, i * n + d, -1.0 / dt);
        }
    }
    for (int k = 0; k < N * n; ++k) trip.emplace_back(k, k, 1.0);
    SparseMatrix M(N * n, N * n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

} // namespace

std::vector<double> geometric_schedule(double start, double ratio, int count) {
    if (!(start > 0) || !(ratio > 0) || !(ratio < 1) || count < 1)
        throw std::invalid_argument("schedule needs start>0, 0<ratio<1, count>=1");
    std::vector<double> out(count);
    double v = start;
    for (int i = 0; i < count; ++i, v *= ratio) out[i] = v;
    return out;
}

Vector morse_spectrum(const DiscreteCurve& curve, const Body& body,
                      const PenaltyParams& p) {
    Matrix H = Matrix(hess_lagrangian(curve, body, p));
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("Hessian eigensolve failed");
    return es.eigenvalues();
}

int morse_index_of(const Vector& spectrum, double rel_tol) {
    if (spectrum.size() == 0) return 0;
    double scale = std::max(std::abs(spectrum(0)),
                            std::abs(spectrum(spectrum.size() - 1)));
    double cut = -rel_tol * std::max(scale, 1e-300);
    int idx = 0;
    for (int i = 0; i < spectrum.size(); ++i)
        if (spectrum(i) < cut) ++idx;
    return idx;
}

CriticalPointRecord find_critical_point(const DiscreteCurve& seed,
                                        const Body& body,
                                        const PenaltyParams& p,
                                        const SolveOptions& opts) {
    validate_curve(seed);
    const int N = seed.node_count();
    const int n = seed.dim();
    const double tol = opts.tol_per_node * N;
    const double step_cap = opts.max_step_scale * body.length_scale();

    DiscreteCurve x = seed;
    auto eval0 = try_grad(x, body, p);
    if (!eval0)
        throw DomainViolation("critical point seed leaves the domain", 0.0);
    GradEval cur = *eval0;

    SparseMatrix I = identity_sparse(N * n);
    Eigen::SparseLU<SparseMatrix> metric_lu;
    bool metric_ready = false;

    double tau = 1e-12;                 // relative Tikhonov level
    const double tau_cap = 1e3;
    const double diag_scale = 2.0 / x.dt();
    int stalls = 0;

    auto accept = [&](const DiscreteCurve& trial, const GradEval& ge) {
        x = trial;
        cur = ge;
    };

    const bool dbg = std::getenv("BILLIARDS_SADDLE_TRACE") != nullptr;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        if (cur.norm <= tol) break;
        if (dbg && iter % 25 == 0)
            std::fprintf(stderr, "it=%d |G|=%.3e tau=%.1e\n", iter, cur.norm,
                         tau);

        bool advanced = false;
        bool any_finite_trial = false;

        // Newton phase with Tikhonov escalation.
        SparseMatrix H = hess_lagrangian(x, body, p);
        Vector G = flatten(cur.grad);
        for (double t = tau; t <= tau_cap && !advanced; t *= 100.0) {
            SparseMatrix Hreg = H + (t * diag_scale) * I;
            Eigen::SparseLU<SparseMatrix> lu;
            lu.compute(Hreg);
            if (lu.info() != Eigen::Success) continue;
            Vector s = lu.solve(-G);
            if (!s.allFinite()) continue;
            CurveTangent step = unflatten(s, N, n);
            double m = max_row_norm(step);
            if (m > step_cap) step *= step_cap / m;
            // Floor alpha: if the Newton model needs a microscopic step the
            // quadratic model is not trustworthy, so fail and escalate tau
            // instead of creeping on rounding-noise decreases.
            for (double alpha = 1.0; alpha >= 1e-4; alpha *= 0.5) {
                DiscreteCurve trial = x;
                trial.nodes = x.nodes + alpha * step;
                auto ge = try_grad(trial, body, p);
                if (!ge) continue;
                any_finite_trial = true;
                if (ge->norm <=
                    (1.0 - std::max(1e-4 * alpha, 1e-6)) * cur.norm) {
                    if (dbg && iter % 25 == 0)
                        std::fprintf(stderr,
                                     "   newton t=%.1e a=%.2e |s|=%.2e\n", t,
                                     alpha, m);
                    accept(trial, *ge);
                    tau = std::max(t * 0.01, 1e-12);
                    advanced = true;
                    break;
                }
            }
        }

        if (!advanced) {
            // Fallback: preconditioned descent on the squared residual.
            if (!metric_ready) {
                metric_lu.compute(kinetic_metric(x));
                metric_ready = true;
            }
            Vector G2 = flatten(cur.grad);
            Vector dphi = H * G2; // grad of 0.5*|G|^2, H symmetric
            Vector dir = metric_lu.solve(dphi);
            double slope = dphi.dot(dir); // >= 0, metric is SPD
            CurveTangent dmat = unflatten(dir, N, n);
            double m = max_row_norm(dmat);
            if (m > step_cap) {
                dmat *= step_cap / m;
                slope *= step_cap / m;
            }
            double phi = 0.5 * cur.norm * cur.norm;
            for (double alpha = 1.0; alpha >= 1e-12; alpha *= 0.5) {
                DiscreteCurve trial = x;
                trial.nodes = x.nodes - alpha * dmat;
                auto ge = try_grad(trial, body, p);
                if (!ge) continue;
                any_finite_trial = true;
                double phit = 0.5 * ge->norm * ge->norm;
                if (phit <= phi - 1e-4 * alpha * slope) {
                    accept(trial, *ge);
                    advanced = true;
                    break;
                }
            }
        }

        if (!advanced) {
            if (!any_finite_trial)
                throw SolverError(SolverError::Kind::escaped,
                                  "every trial step left the domain", p.epsilon);
            if (++stalls >= 2)
                throw SolverError(SolverError::Kind::diverged,
                                  "line search stalled", p.epsilon);
        } else {
            stalls = 0;
        }
    }

    if (cur.norm > tol)
        throw SolverError(SolverError::Kind::diverged,
                          "iteration cap reached", p.epsilon);

    double E = energy(x);
    if (E < opts.collapse_energy)
        throw SolverError(SolverError::Kind::collapsed,
                          "converged to a constant loop", p.epsilon);

    CriticalPointRecord rec;
    rec.curve = x;
    rec.grad_norm = cur.norm;
    rec.potential_integral = potential_integral(x, body, p);
    rec.lagrangian_value = E - rec.potential_integral;
    rec.energy_value = E + rec.potential_integral;
    rec.epsilon = p.epsilon;
    rec.delta = p.delta;
    rec.morse_index =
        opts.compute_index ? morse_index_of(morse_spectrum(x, body, p)) : -1;
    return rec;
}

ContinuationTrace continue_to_zero(const DiscreteCurve& seed, const Body& body,
                                   double delta,
                                   const std::vector<double>& schedule,
                                   const SolveOptions& opts) {
    if (schedule.empty())
        throw std::invalid_argument("continuation schedule is empty");
    for (size_t i = 0; i + 1 < schedule.size(); ++i)
        if (!(schedule[i + 1] < schedule[i]))
            throw std::invalid_argument("continuation schedule must decrease");

    ContinuationTrace trace;
    trace.delta = delta;
    DiscreteCurve x = seed;
    for (double eps : schedule) {
        PenaltyParams p{delta, eps};
        ContinuationStep step;
        auto warm = try_grad(x, body, p);
        step.warm_start_grad_norm = warm ? warm->norm : kInf;
        step.record = find_critical_point(x, body, p, opts);
        step.curve_shift = max_row_norm(step.record.curve.nodes - x.nodes);

        const DiscreteCurve& c = step.record.curve;
        step.force_profile.resize(c.node_count());
        for (int i = 0; i < c.node_count(); ++i) {
            double h = truncated_distance(body, delta, c.node(i));
            step.force_profile(i) = 2.0 * eps / (h * h * h);
        }
        trace.steps.push_back(std::move(step));
        x = trace.steps.back().record.curve;

        size_t k = trace.steps.size();
        if (k >= 3) {
            double p0 = trace.steps[k - 3].record.potential_integral;
            double p1 = trace.steps[k - 2].record.potential_integral;
            double p2 = trace.steps[k - 1].record.potential_integral;
            if (p0 < p1 && p1 < p2) trace.potential_trend_broken = true;
        }
    }
    return trace;
}

Vector ray_to_depth(const Body& body, const Vector& from, const Vector& dir,
                    double depth) {
    Vector u = dir.normalized();
    if (!(body.signed_distance(from) > depth))
        throw std::invalid_argument("ray_to_depth: start not deeper than target");
    double hi = body.support(u) - from.dot(u); // beyond the boundary hit
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (body.signed_distance(from + mid * u) > depth) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-15 * body.length_scale()) break;
    }
    return from + 0.5 * (lo + hi) * u;
}

DiscreteCurve bounce_loop_seed(const Body& body, const Vector& direction,
                               int node_count, double margin,
                               double flatten_ratio) {
    Vector u = direction.normalized();
    Vector c = inradius(body).center;
    Vector pp = ray_to_depth(body, c, u, margin);
    Vector pm = ray_to_depth(body, c, -u, margin);
    Vector mid = 0.5 * (pp + pm);
    double a = 0.5 * (pp - pm).norm();

    DiscreteCurve out;
    out.closed = true;
    out.nodes.resize(node_count, u.size());
    if (flatten_ratio == 0.0) {
        // Degenerate out-and-back fold at constant speed — the shape of the
        // penalized bouncing-ball loop (the loop retraces its chord, so
        // opposite-phase nodes coincide; that is fine, nothing divides by
        // node distances).
        for (int i = 0; i < node_count; ++i) {
            double s = double(i) / node_count;
            double tri = 2.0 * std::abs(2.0 * s - 1.0) - 1.0;
            out.nodes.row(i) = (mid + tri * a * u).transpose();
        }
        return out;
    }

    // Thin oval, resampled to uniform arc length so the seed has nearly
    // constant speed.
    Vector w;
    if (u.size() == 2) {
        w = Vector(2);
        w << -u(1), u(0);
    } else {
        int k = 0;
        u.cwiseAbs().minCoeff(&k);
        Vector e = Vector::Zero(u.size());
        e(k) = 1.0;
        w = (e - e.dot(u) * u).normalized();
    }
    double b = flatten_ratio * a;
    std::vector<Vector> dense;
    int M = 64 * node_count;
    dense.reserve(M);
    for (int i = 0; i < M; ++i) {
        double t = 2.0 * std::numbers::pi * i / M;
        dense.push_back(mid + std::cos(t) * a * u + std::sin(t) * b * w);
    }
    return polygon_loop_seed(dense, mid, node_count, 0.0);
}

namespace {

// One leg of a conserving out-and-back motion along the incenter chord in
// direction u: speed profile v(s) = sqrt(2(E - eps U(s))), turning points
// where v = 0, with E tuned by bisection so the leg takes exactly leg_time.
// Seeding with this profile (instead of constant speed) keeps the initial
// residual off the soft reparametrization mode, which Newton handles badly.
struct ConservingChord {
    Vector origin;               // near-wall chord endpoint
    Vector u;                    // unit chord direction
    std::vector<double> s_edge;  // arc positions at quadrature cell edges
    std::vector<double> t_cum;   // cumulative time at those edges

    Vector position_at(double t) const {
        double total = t_cum.back();
        double target = std::clamp(t, 0.0, total);
        auto it = std::lower_bound(t_cum.begin() + 1, t_cum.end(), target);
        size_t j = it - t_cum.begin();
        double t0 = t_cum[j - 1], t1 = t_cum[j];
        double w = t1 > t0 ? (target - t0) / (t1 - t0) : 0.0;
        double s = s_edge[j - 1] + w * (s_edge[j] - s_edge[j - 1]);
        return origin + s * u;
    }
};

ConservingChord conserving_chord(const Body& body, const Vector& direction,
                                 const PenaltyParams& p, double leg_time) {
    ConservingChord cc;
    cc.u = direction.normalized();
    Vector c = inradius(body).center;
    double tiny = 1e-9 * body.length_scale();
    Vector pm = ray_to_depth(body, c, -cc.u, tiny);
    Vector pp = ray_to_depth(body, c, cc.u, tiny);
    cc.origin = pm;
    double C = (pp - pm).norm();

    auto pot = [&](double s) {
        return p.epsilon * barrier_value(body, p.delta, cc.origin + s * cc.u);
    };

    // Barrier minimum along the chord (depth is concave along a chord of a
    // convex body, so a coarse scan suffices).
    double s_min = 0.5 * C, b_min = kInf;
    for (int i = 1; i < 256; ++i) {
        double s = C * i / 256.0;
        double b = pot(s);
        if (b < b_min) { b_min = b; s_min = s; }
    }

    auto turning_points = [&](double E) {
        double lo = 0.0, hi = s_min;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (pot(mid) > E ? lo : hi) = mid;
        }
        double sA = 0.5 * (lo + hi);
        lo = s_min; hi = C;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (pot(mid) > E ? hi : lo) = mid;
        }
        return std::pair<double, double>{sA, 0.5 * (lo + hi)};
    };

    const int M = 4096;
    // Chebyshev-style substitution s = sm + sh*sin(phi) tames the 1/v
    // square-root singularity at the turning points.
    auto leg_duration = [&](double E, std::vector<double>* edges,
                            std::vector<double>* cum) {
        auto [sA, sB] = turning_points(E);
        double sm = 0.5 * (sA + sB), sh = 0.5 * (sB - sA);
        if (edges) { edges->assign(1, sA); cum->assign(1, 0.0); }
        double total = 0.0;
        for (int j = 0; j < M; ++j) {
            double phi = -0.5 * std::numbers::pi +
                         std::numbers::pi * (j + 0.5) / M;
            double s = sm + sh * std::sin(phi);
            double ds = std::numbers::pi / M * sh * std::cos(phi);
            double v = std::sqrt(2.0 * std::max(E - pot(s), 0.0));
            total += ds / std::max(v, 1e-14);
            if (edges) {
                double edge_phi = -0.5 * std::numbers::pi +
                                  std::numbers::pi * (j + 1.0) / M;
                edges->push_back(sm + sh * std::sin(edge_phi));
                cum->push_back(total);
            }
        }
        return total;
    };

    // Period shooting: leg duration decreases in E; bracket then bisect.
    double E_lo = b_min + 1e-12 * (1.0 + std::abs(b_min));
    double E_hi = std::max(2.0 * (C / leg_time) * (C / leg_time), E_lo * 2);
    for (int it = 0; it < 80 && leg_duration(E_hi, nullptr, nullptr) > leg_time;
         ++it)
        E_hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double E = 0.5 * (E_lo + E_hi);
        (leg_duration(E, nullptr, nullptr) > leg_time ? E_lo : E_hi) = E;
        if (E_hi - E_lo <= 1e-15 * E_hi) break;
    }
    double E = 0.5 * (E_lo + E_hi);
    leg_duration(E, &cc.s_edge, &cc.t_cum);
    // Normalize so the tabulated leg lasts exactly leg_time.
    double scale = leg_time / cc.t_cum.back();
    for (double& t : cc.t_cum) t *= scale;
    return cc;
}

} // namespace

DiscreteCurve bounce_loop_seed(const Body& body, const Vector& direction,
                               int node_count, const PenaltyParams& p) {
    ConservingChord cc = conserving_chord(body, direction, p, 0.5);
    DiscreteCurve out;
    out.closed = true;
    out.nodes.resize(node_count, direction.size());
    for (int i = 0; i < node_count; ++i) {
        double t = double(i) / node_count;
        out.nodes.row(i) = cc.position_at(std::min(t, 1.0 - t)).transpose();
    }
    return out;
}

DiscreteCurve chord_seed(const Body& body, const Vector& direction,
                         int node_count, const PenaltyParams& p) {
    ConservingChord cc = conserving_chord(body, direction, p, 1.0);
    DiscreteCurve out;
    out.closed = false;
    out.nodes.resize(node_count, direction.size());
    for (int i = 0; i < node_count; ++i)
        out.nodes.row(i) =
            cc.position_at(double(i) / (node_count - 1)).transpose();
    return out;
}

DiscreteCurve chord_seed(const Body& body, const Vector& direction,
                         int node_count, double margin) {
    Vector u = direction.normalized();
    Vector c = inradius(body).center;
    Vector pp = ray_to_depth(body, c, u, margin);
    Vector pm = ray_to_depth(body, c, -u, margin);
    DiscreteCurve out;
    out.closed = false;
    out.nodes.resize(node_count, u.size());
    for (int i = 0; i < node_count; ++i) {
        double s = double(i) / (node_count - 1);
        out.nodes.row(i) = ((1.0 - s) * pm + s * pp).transpose();
    }
    return out;
}

DiscreteCurve polygon_loop_seed(const std::vector<Vector>& vertices,
                                const Vector& interior_point, int node_count,
                                double shrink) {
    if (vertices.size() < 2)
        throw std::invalid_argument("polygon seed needs at least 2 vertices");
    const int m = static_cast<int>(vertices.size());
    std::vector<double> cum(m + 1, 0.0);
    for (int i = 0; i < m; ++i)
        cum[i + 1] = cum[i] + (vertices[(i + 1) % m] - vertices[i]).norm();
    double total = cum[m];
    if (!(total > 0))
        throw std::invalid_argument("polygon seed has zero length");

    DiscreteCurve out;
    out.closed = true;
    out.nodes.resize(node_count, interior_point.size());
    int edge = 0;
    for (int i = 0; i < node_count; ++i) {
        double s = total * i / node_count;
        while (edge + 1 < m && cum[edge + 1] < s) ++edge;
        double w = (s - cum[edge]) / (cum[edge + 1] - cum[edge]);
        Vector q = (1.0 - w) * vertices[edge] + w * vertices[(edge + 1) % m];
        Vector shrunk = interior_point + (1.0 - shrink) * (q - interior_point);
        out.nodes.row(i) = shrunk.transpose();
    }
    return out;
}

} // namespace billiards
