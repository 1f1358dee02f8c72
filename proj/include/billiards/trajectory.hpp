#pragma once

#include <vector>

#include "billiards/saddle.hpp"

namespace billiards {

struct TrajectorySegment {
    Vector start;
    Vector end;
    Vector direction; // unit vector from start to end
};

/// Piecewise-geodesic limit object: a closed (periodic) or open (brake)
/// billiard trajectory at unit time span and constant nominal speed.
struct BilliardTrajectory {
    enum class Kind { periodic, brake };
    Kind kind = Kind::periodic;
    std::vector<double> bounce_times;   // ordered, in [0,1)
    std::vector<Vector> bounce_points;  // on the boundary
    std::vector<TrajectorySegment> segments;
    double speed = 0;         // sqrt(2 * energy_value)
    double total_length = 0;  // speed * unit time span
};

struct BounceEvent {
    double time;
    Vector point; // projected to the boundary
};

struct BounceOptions {
    double threshold = 5.0; // spike cut, times the mean force density
    int gap = 3;            // minimum cells between distinct clusters
};

/// Threshold the final force-density profile of a continuation, cluster the
/// above-threshold cells, and return one bounce per cluster at the
/// density-weighted centroid (time and boundary point). For open curves the
/// endpoint clusters are the brake points, not bounces, and are dropped.
/// Throws BounceDetectionError (no_bounces | merge_ambiguity).
std::vector<BounceEvent> detect_bounces(const ContinuationTrace& trace,
                                        const Body& body,
                                        const BounceOptions& opts = {});

struct AssemblyOptions {
    // Max node deviation from its segment chord, relative to body scale.
    double straightness = 0.02;
    // Allowed relative gap between polygon length and speed * time span.
    double length_slack = 0.02;
};

/// Replace the near-boundary arcs of a converged record by straight
/// segments joining consecutive bounce points (plus the projected curve
/// endpoints for brake kind). Throws AssemblyFailure when the curve is not
/// straight between bounces or the length bookkeeping disagrees — both mean
/// the continuation stopped at too large an epsilon.
BilliardTrajectory assemble(const CriticalPointRecord& final_record,
                            const std::vector<BounceEvent>& bounces,
                            const Body& body,
                            const AssemblyOptions& opts = {});

struct ReflectionReport {
    struct BounceCheck {
        double tangential;   // |tangential part of (v_out - v_in)| / speed
        double normal_sum;   // |normal part of (v_out + v_in)| / speed
        double speed_error;  // |incoming speed - outgoing speed| / speed
    };
    std::vector<BounceCheck> bounces;
    double brake_start = 0; // endpoint perpendicularity (brake kind only)
    double brake_end = 0;
    double max_residual = 0;
    double tol = 0;
    bool passed = false;
};

/// Check the reflection law at every bounce (tangential difference vanishes,
/// normal parts cancel, incoming and outgoing speeds agree) and, for brake
/// trajectories, endpoint perpendicularity. Reports; never throws.
ReflectionReport verify_reflection(const BilliardTrajectory& traj,
                                   const Body& body, double tol);

} // namespace billiards
