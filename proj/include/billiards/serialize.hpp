#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "billiards/exact_billiard.hpp"
#include "billiards/variational.hpp"

namespace billiards {

/// JSON codecs for the artifact records the harness writes. All encoders
/// are deterministic: object keys are sorted and doubles use the shortest
/// round-trip representation.
nlohmann::json body_to_json(const Body& body);
Body body_from_json(const nlohmann::json& j);

nlohmann::json curve_to_json(const DiscreteCurve& curve);
DiscreteCurve curve_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const CriticalPointRecord& record);

/// Per-step scalar summaries plus the full final record; force profiles are
/// reduced to their maxima (the bounce extraction works on the in-memory
/// trace, not the artifact).
nlohmann::json trace_to_json(const ContinuationTrace& trace);

nlohmann::json trajectory_to_json(const BilliardTrajectory& trajectory);
BilliardTrajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json shoot_to_json(const ShootResult& result);
nlohmann::json reflection_to_json(const ReflectionReport& report);
nlohmann::json inequality_to_json(const InequalityReport& report);

/// One row per report: name,subject,lhs,rhs,slack,verdict,lhs_source,
/// rhs_source. Numbers use the JSON shortest round-trip form.
std::string inequality_csv(const std::vector<InequalityReport>& reports);

/// Planar outline of the body (support sweep) with the trajectory polygon
/// and bounce markers overlaid when given. Throws std::invalid_argument
/// for bodies of dimension other than 2.
std::string trajectory_svg(const Body& body,
                           const BilliardTrajectory* trajectory = nullptr);

} // namespace billiards
