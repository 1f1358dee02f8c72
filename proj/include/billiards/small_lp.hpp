#pragma once

#include <Eigen/Dense>
#include <vector>

namespace billiards {

/// One row of a linear program: a . y <= b.
struct LinearConstraint {
    Eigen::VectorXd a;
    double b;
};

struct LpResult {
    bool feasible;
    Eigen::VectorXd y;
};

/// Minimize c . y subject to the given rows plus an implicit bounding box
/// |y_j| <= box. Seidel's randomized incremental algorithm with a fixed
/// shuffle seed (deterministic); intended for dimension <= 4.
LpResult solve_lp(const Eigen::VectorXd& c,
                  const std::vector<LinearConstraint>& rows, double box);

/// Maximize m subject to x . dir[g] + m <= offset[g] over all g.
/// The maximizer is the deepest point of the halfspace intersection
/// {x : x . dir[g] <= offset[g]} measured against unit dirs.
struct MarginResult {
    bool feasible;
    Eigen::VectorXd x;
    double margin;
};
MarginResult max_margin(const std::vector<Eigen::VectorXd>& dirs,
                        const std::vector<double>& offsets, double box);

} // namespace billiards
