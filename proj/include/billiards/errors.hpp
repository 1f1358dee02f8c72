#pragma once

#include <stdexcept>
#include <string>

namespace billiards {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/* Query point left the region where a barrier quantity is defined
 * (on the boundary or outside the body). Carries the offending signed
 * distance so callers can report how far out the point was. */
class DomainViolation : public Error {
public:
    DomainViolation(const std::string& what, double signed_distance)
        : Error(what), signed_distance(signed_distance) {}
    double signed_distance;
};

/* Truncated distance fell under the overflow floor; evaluating the
 * barrier there would produce useless huge numbers. */
class BarrierOverflow : public Error {
public:
    BarrierOverflow(const std::string& what, double distance)
        : Error(what), distance(distance) {}
    double distance;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    enum class Kind { collapsed, diverged, escaped };
    SolverError(Kind kind, const std::string& what, double epsilon)
        : Error(what), kind(kind), epsilon(epsilon) {}
    Kind kind;
    double epsilon;
};

class BounceDetectionError : public Error {
public:
    enum class Kind { no_bounces, merge_ambiguity };
    BounceDetectionError(Kind kind, const std::string& what)
        : Error(what), kind(kind) {}
    Kind kind;
};

class AssemblyFailure : public Error {
public:
    using Error::Error;
};

/* Requested report needs estimates/artifacts that were never produced. */
class IncompleteReport : public Error {
public:
    using Error::Error;
};

} // namespace billiards
