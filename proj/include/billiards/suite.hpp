#pragma once

#include <iosfwd>
#include <optional>

#include "billiards/variational.hpp"

namespace billiards {

struct NamedBody {
    std::string name;
    Body body;
};

/// Standard body collection driving the examples, the inequality tables and
/// the acceptance suite: two discs, an ellipse, a quartic ball, and an
/// ellipse + ball Minkowski sum.
std::vector<NamedBody> standard_zoo();

/// Zoo index pairs for the Minkowski-sum superadditivity checks. Pairs of
/// homothetic balls are flagged: their sums must achieve equality.
struct ZooPair {
    int left = -1;
    int right = -1;
    bool homothetic_balls = false;
};
std::vector<ZooPair> standard_pairs();

/// Nested (inner, outer) zoo index pairs, support dominance verified over a
/// direction grid at construction.
std::vector<NestedRelation> standard_nestings();

struct CriterionResult {
    int index = 0; // 1-based criterion number
    std::string name;
    bool passed = false;
    std::string detail; // key numbers, one line
};

struct AcceptanceOptions {
    int nodes = 256;         // continuation resolution (criteria 2 and 3)
    int schedule_steps = 22; // epsilon schedule 0.1 * 2^-k
    int derivative_trials = 100;
};

/// Side artifacts of an acceptance run, for export by the harness.
struct AcceptanceArtifacts {
    std::vector<InequalityReport> reports;
    std::optional<ContinuationTrace> loop_trace;
    std::optional<ContinuationTrace> chord_trace;
    std::optional<BilliardTrajectory> loop_trajectory;
    std::optional<BilliardTrajectory> chord_trajectory;
};

/// Run the eight acceptance criteria in order, streaming one line per
/// criterion to `progress` when given. Deterministic; never throws —
/// exceptions inside a criterion fail that criterion with the message in
/// its detail.
std::vector<CriterionResult> run_acceptance(
    std::ostream* progress = nullptr, const AcceptanceOptions& opts = {},
    AcceptanceArtifacts* artifacts = nullptr);

} // namespace billiards
