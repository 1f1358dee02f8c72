#include "billiards/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace billiards {

namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

json points_to_json(const std::vector<Vector>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(vector_to_json(p));
    return a;
}

std::vector<Vector> points_from_json(const json& j) {
    std::vector<Vector> pts;
    for (const auto& e : j) pts.push_back(vector_from_json(e));
    return pts;
}

// Compact deterministic coordinate text for SVG attributes.
std::string svg_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

} // namespace

json body_to_json(const Body& body) {
    json j;
    j["tolerance"] = body.tolerance();
    if (const auto* b = std::get_if<Ball>(&body.kind())) {
        j["type"] = "ball";
        j["center"] = vector_to_json(b->center);
        j["radius"] = b->radius;
    } else if (const auto* e = std::get_if<Ellipsoid>(&body.kind())) {
        j["type"] = "ellipsoid";
        j["center"] = vector_to_json(e->center);
        j["semi_axes"] = vector_to_json(e->semi_axes);
    } else if (const auto* p = std::get_if<PNormBall>(&body.kind())) {
        j["type"] = "pnorm_ball";
        j["center"] = vector_to_json(p->center);
        j["scales"] = vector_to_json(p->scales);
        j["exponent"] = p->exponent;
    } else {
        const auto& sum = std::get<MinkowskiSum>(body.kind());
        j["type"] = "sum";
        json parts = json::array();
        for (const Body& part : sum.parts) parts.push_back(body_to_json(part));
        j["parts"] = parts;
    }
    return j;
}

Body body_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    const double tol = j.value("tolerance", Body::default_tolerance);
    if (type == "ball")
        return Body::make_ball(vector_from_json(j.at("center")),
                               j.at("radius").get<double>(), tol);
    if (type == "ellipsoid")
        return Body::make_ellipsoid(vector_from_json(j.at("center")),
                                    vector_from_json(j.at("semi_axes")), tol);
    if (type == "pnorm_ball")
        return Body::make_pnorm_ball(vector_from_json(j.at("center")),
                                     vector_from_json(j.at("scales")),
                                     j.at("exponent").get<int>(), tol);
    if (type == "sum") {
        std::vector<Body> parts;
        for (const auto& part : j.at("parts"))
            parts.push_back(body_from_json(part));
        return Body::make_sum(std::move(parts), tol);
    }
    throw std::invalid_argument("body_from_json: unknown body type " + type);
}

json curve_to_json(const DiscreteCurve& curve) {
    json j;
    j["closed"] = curve.closed;
    json rows = json::array();
    for (int i = 0; i < curve.node_count(); ++i)
        rows.push_back(vector_to_json(curve.node(i)));
    j["nodes"] = rows;
    return j;
}

DiscreteCurve curve_from_json(const json& j) {
    DiscreteCurve c;
    c.closed = j.at("closed").get<bool>();
    const auto& rows = j.at("nodes");
    if (rows.empty()) throw std::invalid_argument("curve_from_json: no nodes");
    c.nodes.resize(static_cast<int>(rows.size()),
                   static_cast<int>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i)
        c.nodes.row(static_cast<int>(i)) =
            vector_from_json(rows[i]).transpose();
    return c;
}

json record_to_json(const CriticalPointRecord& record) {
    json j;
    j["curve"] = curve_to_json(record.curve);
    j["lagrangian"] = record.lagrangian_value;
    j["grad_norm"] = record.grad_norm;
    j["morse_index"] = record.morse_index;
    j["energy"] = record.energy_value;
    j["potential"] = record.potential_integral;
    j["epsilon"] = record.epsilon;
    j["delta"] = record.delta;
    return j;
}

json trace_to_json(const ContinuationTrace& trace) {
    json j;
    j["delta"] = trace.delta;
    j["potential_trend_broken"] = trace.potential_trend_broken;
    json steps = json::array();
    for (const auto& step : trace.steps) {
        json s;
        s["epsilon"] = step.record.epsilon;
        s["lagrangian"] = step.record.lagrangian_value;
        s["energy"] = step.record.energy_value;
        s["potential"] = step.record.potential_integral;
        s["grad_norm"] = step.record.grad_norm;
        s["morse_index"] = step.record.morse_index;
        s["warm_start_grad_norm"] = step.warm_start_grad_norm;
        s["curve_shift"] = step.curve_shift;
        s["force_max"] =
            step.force_profile.size() ? step.force_profile.maxCoeff() : 0.0;
        steps.push_back(s);
    }
    j["steps"] = steps;
    j["final"] = record_to_json(trace.final_record());
    return j;
}

json trajectory_to_json(const BilliardTrajectory& trajectory) {
    json j;
    j["kind"] = trajectory.kind == BilliardTrajectory::Kind::periodic
                    ? "periodic"
                    : "brake";
    j["bounce_times"] = trajectory.bounce_times;
    j["bounce_points"] = points_to_json(trajectory.bounce_points);
    json segs = json::array();
    for (const auto& seg : trajectory.segments) {
        json s;
        s["start"] = vector_to_json(seg.start);
        s["end"] = vector_to_json(seg.end);
        segs.push_back(s);
    }
    j["segments"] = segs;
    j["speed"] = trajectory.speed;
    j["total_length"] = trajectory.total_length;
    return j;
}

BilliardTrajectory trajectory_from_json(const json& j) {
    BilliardTrajectory t;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "periodic")
        t.kind = BilliardTrajectory::Kind::periodic;
    else if (kind == "brake")
        t.kind = BilliardTrajectory::Kind::brake;
    else
        throw std::invalid_argument("trajectory_from_json: bad kind " + kind);
    t.bounce_times = j.at("bounce_times").get<std::vector<double>>();
    t.bounce_points = points_from_json(j.at("bounce_points"));
    for (const auto& s : j.at("segments")) {
        TrajectorySegment seg;
        seg.start = vector_from_json(s.at("start"));
        seg.end = vector_from_json(s.at("end"));
        double len = (seg.end - seg.start).norm();
        if (!(len > 0))
            throw std::invalid_argument(
                "trajectory_from_json: zero-length segment");
        seg.direction = (seg.end - seg.start) / len;
        t.segments.push_back(seg);
    }
    t.speed = j.at("speed").get<double>();
    t.total_length = j.at("total_length").get<double>();
    return t;
}

json shoot_to_json(const ShootResult& result) {
    json j;
    j["points"] = points_to_json(result.polygon.points);
    j["angles"] = result.angles;
    json res = json::array();
    for (int i = 0; i < result.residuals.size(); ++i)
        res.push_back(result.residuals(i));
    j["residuals"] = res;
    j["length"] = result.length;
    j["iterations"] = result.iterations;
    return j;
}

json reflection_to_json(const ReflectionReport& report) {
    json j;
    json bounces = json::array();
    for (const auto& b : report.bounces) {
        json e;
        e["tangential"] = b.tangential;
        e["normal_sum"] = b.normal_sum;
        e["speed_error"] = b.speed_error;
        bounces.push_back(e);
    }
    j["bounces"] = bounces;
    j["brake_start"] = report.brake_start;
    j["brake_end"] = report.brake_end;
    j["max_residual"] = report.max_residual;
    j["tol"] = report.tol;
    j["passed"] = report.passed;
    return j;
}

namespace {

const char* verdict_name(InequalityVerdict v) {
    switch (v) {
        case InequalityVerdict::holds: return "holds";
        case InequalityVerdict::fails: return "fails";
        case InequalityVerdict::equality: return "equality-within-tol";
    }
    return "unknown";
}

} // namespace

json inequality_to_json(const InequalityReport& report) {
    json j;
    j["name"] = report.name;
    j["subject"] = report.subject;
    j["lhs"] = report.lhs;
    j["rhs"] = report.rhs;
    j["slack"] = report.slack;
    j["verdict"] = verdict_name(report.verdict);
    j["lhs_source"] = report.lhs_source;
    j["rhs_source"] = report.rhs_source;
    return j;
}

std::string inequality_csv(const std::vector<InequalityReport>& reports) {
    std::ostringstream out;
    out << "name,subject,lhs,rhs,slack,verdict,lhs_source,rhs_source\n";
    auto cell = [](const std::string& s) {
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        return quoted + "\"";
    };
    for (const auto& r : reports) {
        out << cell(r.name) << ',' << cell(r.subject) << ','
            << json(r.lhs).dump() << ',' << json(r.rhs).dump() << ','
            << json(r.slack).dump() << ',' << verdict_name(r.verdict) << ','
            << cell(r.lhs_source) << ',' << cell(r.rhs_source) << '\n';
    }
    return out.str();
}

std::string trajectory_svg(const Body& body,
                           const BilliardTrajectory* trajectory) {
    if (body.dim() != 2)
        throw std::invalid_argument("trajectory_svg: planar bodies only");

    const int samples = 512;
    std::vector<Vector> outline;
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (int i = 0; i < samples; ++i) {
        double t = 2.0 * M_PI * i / samples;
        Vector dir(2);
        dir << std::cos(t), std::sin(t);
        Vector p = body.support_point(dir);
        outline.push_back(p);
        min_x = std::min(min_x, p(0));
        max_x = std::max(max_x, p(0));
        min_y = std::min(min_y, p(1));
        max_y = std::max(max_y, p(1));
    }
    const double pad = 0.05 * std::max(max_x - min_x, max_y - min_y);
    min_x -= pad;
    min_y -= pad;
    max_x += pad;
    max_y += pad;
    const double stroke = 0.004 * std::max(max_x - min_x, max_y - min_y);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
        << "height=\"640\" viewBox=\"" << svg_num(min_x) << ' '
        << svg_num(-max_y) << ' ' << svg_num(max_x - min_x) << ' '
        << svg_num(max_y - min_y) << "\">\n";
    // Flip to the usual y-up orientation.
    svg << "<g transform=\"scale(1,-1)\">\n";

    svg << "<path fill=\"#f5f5f5\" stroke=\"#333333\" stroke-width=\""
        << svg_num(stroke) << "\" d=\"";
    for (size_t i = 0; i < outline.size(); ++i)
        svg << (i == 0 ? 'M' : 'L') << svg_num(outline[i](0)) << ' '
            << svg_num(outline[i](1));
    svg << "Z\"/>\n";

    if (trajectory) {
        svg << "<path fill=\"none\" stroke=\"#c0392b\" stroke-width=\""
            << svg_num(1.5 * stroke) << "\" d=\"";
        for (size_t i = 0; i < trajectory->segments.size(); ++i) {
            const auto& seg = trajectory->segments[i];
            if (i == 0)
                svg << 'M' << svg_num(seg.start(0)) << ' '
                    << svg_num(seg.start(1));
            svg << 'L' << svg_num(seg.end(0)) << ' ' << svg_num(seg.end(1));
        }
        svg << "\"/>\n";
        for (const auto& p : trajectory->bounce_points)
            svg << "<circle cx=\"" << svg_num(p(0)) << "\" cy=\""
                << svg_num(p(1)) << "\" r=\"" << svg_num(2.5 * stroke)
                << "\" fill=\"#2c3e50\"/>\n";
    }

    svg << "</g>\n</svg>\n";
    return svg.str();
}

} // namespace billiards
