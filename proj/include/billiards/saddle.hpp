#pragma once

#include <vector>

#include "billiards/loopspace.hpp"

namespace billiards {

struct SolveOptions {
    double tol_per_node = 1e-9;     // gradient tolerance = tol_per_node * N
    int max_iterations = 400;
    double collapse_energy = 1e-8;  // below this the curve is a constant loop
    double max_step_scale = 0.25;   // per-node step cap, times length_scale
    bool compute_index = true;
};

/// A converged critical point of the penalized action, with the energy
/// bookkeeping the continuation tracks. energy_value is the conserved
/// quantity (kinetic + potential), lagrangian_value = kinetic - potential,
/// so energy_value = lagrangian_value + 2 * potential_integral identically.
struct CriticalPointRecord {
    DiscreteCurve curve;
    double lagrangian_value = 0;
    double grad_norm = 0;
    int morse_index = -1;
    double energy_value = 0;
    double potential_integral = 0;
    double epsilon = 0;
    double delta = 0;
};

/// Damped Newton on the gradient of the penalized action with a Tikhonov
/// ladder and a preconditioned residual-descent fallback. Iterates stay
/// interior: trial steps that leave the domain or hit the barrier's
/// underflow guard are rejected by the line search.
/// Throws SolverError(collapsed | diverged | escaped).
CriticalPointRecord find_critical_point(const DiscreteCurve& seed,
                                        const Body& body,
                                        const PenaltyParams& p,
                                        const SolveOptions& opts = {});

/// Eigenvalues of the action Hessian at a curve, ascending.
Vector morse_spectrum(const DiscreteCurve& curve, const Body& body,
                      const PenaltyParams& p);

/// Count of eigenvalues below -tol, tol = rel_tol * spectral scale.
int morse_index_of(const Vector& spectrum, double rel_tol = 1e-8);

struct ContinuationStep {
    CriticalPointRecord record;
    Vector force_profile;          // 2 eps / h^3 per node
    double warm_start_grad_norm;   // gradient norm before solving this step
    double curve_shift;            // max node travel from the previous record
};

struct ContinuationTrace {
    std::vector<ContinuationStep> steps;
    double delta = 0;
    // Raised when the potential integral grows across three consecutive
    // steps — the vanishing-potential trend of the limit is broken.
    bool potential_trend_broken = false;

    const CriticalPointRecord& final_record() const {
        if (steps.empty()) throw std::logic_error("empty continuation trace");
        return steps.back().record;
    }
};

std::vector<double> geometric_schedule(double start, double ratio, int count);

/// Warm-started solve along a strictly decreasing epsilon schedule with a
/// fixed delta. Propagates solver errors tagged with the failing epsilon.
ContinuationTrace continue_to_zero(const DiscreteCurve& seed, const Body& body,
                                   double delta,
                                   const std::vector<double>& schedule,
                                   const SolveOptions& opts = {});

/// March from `from` along `dir` (not necessarily unit) to the point at
/// boundary distance `depth`, by bisection on the signed distance.
Vector ray_to_depth(const Body& body, const Vector& from, const Vector& dir,
                    double depth);

/// Closed-curve seed aimed at a bouncing-ball orbit along `direction`:
/// by default the degenerate constant-speed fold that retraces the chord
/// through the incenter (endpoints at boundary distance `margin`); with
/// flatten_ratio > 0, a thin oval of that width instead.
DiscreteCurve bounce_loop_seed(const Body& body, const Vector& direction,
                               int node_count, double margin,
                               double flatten_ratio = 0.0);

/// Same fold, but with node spacing following the conserving speed profile
/// |v| = sqrt(2(E - eps U)) for the given penalty weight, E tuned so one
/// out-and-back cycle takes unit time. Starts Newton close enough to the
/// equilibrium to make cold solves reliable at any epsilon.
DiscreteCurve bounce_loop_seed(const Body& body, const Vector& direction,
                               int node_count, const PenaltyParams& p);

/// Straight open chord through the incenter along `direction`, endpoints
/// at boundary distance `margin`: the brake-trajectory seed.
DiscreteCurve chord_seed(const Body& body, const Vector& direction,
                         int node_count, double margin);

/// Brake seed with the conserving speed profile for the given penalty
/// weight, one traversal per unit time (see the closed-curve overload).
DiscreteCurve chord_seed(const Body& body, const Vector& direction,
                         int node_count, const PenaltyParams& p);

/// Closed curve tracing a polygon's edges (arc-length parametrization),
/// shrunk toward an interior point so all nodes are strictly interior.
DiscreteCurve polygon_loop_seed(const std::vector<Vector>& vertices,
                                const Vector& interior_point, int node_count,
                                double shrink);

} // namespace billiards
