#pragma once

#include <optional>
#include <string>
#include <vector>

#include "billiards/exact_billiard.hpp"
#include "billiards/trajectory.hpp"

namespace billiards {

/// Support function of a finite point set: max vertex dot product. Exact
/// for piecewise-geodesic curves, whose support is attained at vertices.
/// Throws std::invalid_argument for a zero direction or an empty set.
double curve_support(const std::vector<Vector>& points,
                     const Vector& direction);
double curve_support(const DiscreteCurve& curve, const Vector& direction);
double curve_support(const BouncePolygon& polygon, const Vector& direction);

/// Witness that no translate of a closed curve fits strictly inside the
/// body. In every listed direction the curve reaches at least as far out as
/// the body's supporting halfplane, and the directions surround the origin
/// (0 in their convex hull), so any translation moves the curve further out
/// in at least one of them.
struct SupportTouchCertificate {
    std::vector<Vector> normals;        // touching directions
    std::vector<double> hull_witness;   // convex weights, sum w_i n_i = 0
    std::vector<double> support_slacks; // curve minus body support, per normal
};

struct CertificateOutcome {
    bool granted = false;
    SupportTouchCertificate certificate; // meaningful only when granted
    std::string refusal;                 // first violated condition otherwise
};

/// Try to certify untranslatability from the given candidate directions:
/// each must satisfy curve_support >= body support - tol (times the body
/// scale), and the origin must lie in their convex hull (weighted normal
/// sum below 1e-10 with nonnegative weights summing to one, found over
/// small subsets). This is a sufficient condition, so a refusal is not a
/// disproof.
CertificateOutcome support_touch_certificate(const std::vector<Vector>& points,
                                             const Body& body,
                                             const std::vector<Vector>& normals,
                                             double tol = 1e-9);

/// Best-translation linear program: maximize the clearance m over
/// translations x subject to x . v <= h(body, v) - h(curve, v) - m for v on
/// a direction grid (one refinement pass around the active directions).
/// fits is set when the margin clears the refined grid resolution; smaller
/// margins are indistinguishable from a support touch at the sampled
/// directions and count as untranslatable.
struct TranslationFit {
    bool fits = false;   // a strictly interior translate exists
    Vector translation;  // the best translation found
    double margin = 0;   // optimal clearance
    int grid_count = 0;  // direction-grid resolution used
};

TranslationFit translation_fit(const std::vector<Vector>& points,
                               const Body& body);

/// Convenience predicate: no translate of the curve fits strictly inside.
bool untranslatable(const std::vector<Vector>& points, const Body& body);

/// Closed-form length of the regular (k, j) star orbit in a disc of the
/// given radius: 2 k r sin(pi j / k). Throws std::invalid_argument unless
/// k >= 2 and 1 <= j <= k - 1.
double disc_orbit_length(double radius, int bounce_count, int winding);

struct EstimateOptions {
    int max_bounces = 5;      // planar shooting up to this many vertices
    bool use_penalty = true;  // corroborate with penalty continuations
    int penalty_nodes = 96;
    int penalty_steps = 13;
    double exact_tol = 1e-6;    // reflection tolerance for exact candidates
    double penalty_tol = 1e-3;  // reflection tolerance for penalty candidates
};

/// A realized shortest-length estimate: the minimizing trajectory over the
/// candidate solvers, with the method that produced it. Candidates must
/// pass verify_reflection and be untranslatable; the estimate is an upper
/// bound by construction.
struct ShortestPeriodicEstimate {
    double length = 0;
    BilliardTrajectory trajectory;
    std::string method;      // solver tag, e.g. "bouncing-ball", "shoot k=3"
    double width_bound = 0;  // 2 * wid(body), cross-check lower candidate
};

/// Minimum verified periodic trajectory length over planar shooting orbits
/// (bounce counts 2..max_bounces, coprime windings), all bouncing-ball
/// orbits, and penalty continuations from fold seeds along the width and
/// axis directions. Near-ties (1e-6 relative) resolve toward the exact
/// solvers so the reported witness carries tight reflection residuals.
/// Throws SolverError(diverged) if every candidate fails.
ShortestPeriodicEstimate shortest_periodic(const Body& body,
                                           const EstimateOptions& opts = {});

/// Minimum verified brake trajectory length: the shortest double-normal
/// chord traversed once, corroborated by an open-curve penalty continuation
/// along the width direction.
struct BrakeEstimate {
    double length = 0;
    BilliardTrajectory trajectory;
    std::string method;
};

BrakeEstimate shortest_brake(const Body& body,
                             const EstimateOptions& opts = {});

/// True when the polygons coincide after translating centroids to the
/// origin and scaling to unit perimeter, up to cyclic relabeling and
/// orientation reversal.
bool similar_polygons(const std::vector<Vector>& a,
                      const std::vector<Vector>& b, double tol = 1e-3);

enum class InequalityVerdict { holds, fails, equality };

/// One checked inequality, normalized to the form lhs >= rhs with
/// slack = lhs - rhs. verdict is equality when |slack| is within the
/// relative equality tolerance (1e-4) and any witness-side condition of the
/// specific check passes; fails when slack is below the check's allowance.
struct InequalityReport {
    std::string name;
    std::string subject; // body or pair label
    double lhs = 0;
    double rhs = 0;
    double slack = 0;
    InequalityVerdict verdict = InequalityVerdict::fails;
    std::string lhs_source;
    std::string rhs_source;
};

/// Everything check_inequalities needs to know about one body.
struct BodyEstimates {
    std::string name;
    int dim = 0;
    double inradius_value = 0;
    double width_value = 0;
    ShortestPeriodicEstimate periodic;
    std::optional<double> brake_length; // set when the brake pipeline ran
};

/// body_index[sum] = body_index[left] + body_index[right] (Minkowski).
struct SumRelation {
    int sum = -1;
    int left = -1;
    int right = -1;
};

/// body_index[inner] is contained in body_index[outer].
struct NestedRelation {
    int inner = -1;
    int outer = -1;
};

/// Emit one report per applicable inequality:
///  - "periodic >= 4 inradius" per body; equality verdict further requires
///    2 r = wid within 1e-4 and a two-bounce witness orbit.
///  - "periodic <= 2 (dim + 1) inradius" per body (reported as lhs >= rhs
///    with the bound on the left).
///  - "brake <= 2 dim inradius" per body with a brake estimate.
///  - "sum superadditivity" per sum relation: periodic(sum) >= periodic(left)
///    + periodic(right) - 1e-3; equality further requires similar witnesses.
///  - "nested monotonicity" per nested relation: periodic(outer) >=
///    periodic(inner) - 1e-6.
/// Throws IncompleteReport when a referenced estimate is missing or
/// invalid, never silently omitting a requested check.
std::vector<InequalityReport> check_inequalities(
    const std::vector<BodyEstimates>& bodies,
    const std::vector<SumRelation>& sums = {},
    const std::vector<NestedRelation>& nestings = {});

} // namespace billiards
