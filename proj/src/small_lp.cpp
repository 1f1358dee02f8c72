#include "billiards/small_lp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace billiards {
namespace {

using Eigen::VectorXd;

constexpr double kEps = 1e-11;

// Recursive core of Seidel's algorithm. `rows` is consumed (shuffled) by
// the call. Returns nullopt when the system is infeasible.
std::optional<VectorXd> seidel(const VectorXd& c,
                               std::vector<LinearConstraint> rows,
                               double box, std::mt19937_64& rng) {
    const int d = static_cast<int>(c.size());
    if (d == 1) {
        double lo = -box, hi = box;
        for (const auto& r : rows) {
            const double a = r.a(0);
            if (std::abs(a) <= kEps) {
                if (r.b < -kEps) return std::nullopt;
                continue;
            }
            const double v = r.b / a;
            if (a > 0) hi = std::min(hi, v);
            else lo = std::max(lo, v);
        }
        // Allow a hair of slack: chains of eliminations can leave the
        // interval inverted by roundoff at an equality-active optimum.
        if (lo > hi + 1e-8 * (1.0 + std::abs(lo) + std::abs(hi)))
            return std::nullopt;
        VectorXd y(1);
        if (lo > hi) y(0) = 0.5 * (lo + hi);
        else y(0) = (c(0) > 0) ? lo : (c(0) < 0 ? hi : 0.5 * (lo + hi));
        return y;
    }

    std::shuffle(rows.begin(), rows.end(), rng);

    VectorXd y(d);
    for (int j = 0; j < d; ++j)
        y(j) = (c(j) > 0) ? -box : (c(j) < 0 ? box : 0.0);

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& ri = rows[i];
        if (ri.a.dot(y) <= ri.b + kEps * (1.0 + std::abs(ri.b)))
            continue;

        // Optimum of the first i constraints violates row i, so the new
        // optimum lies on ri.a . y = ri.b. Eliminate the pivot variable and
        // recurse on the reduced (d-1)-dimensional program.
        int k = 0;
        ri.a.cwiseAbs().maxCoeff(&k);
        const double aik = ri.a(k);
        if (std::abs(aik) <= kEps) return std::nullopt;

        auto reduce = [&](const VectorXd& a, double coef_k) {
            VectorXd out(d - 1);
            int t = 0;
            for (int j = 0; j < d; ++j) {
                if (j == k) continue;
                out(t++) = a(j) - coef_k * ri.a(j) / aik;
            }
            return out;
        };

        std::vector<LinearConstraint> sub;
        sub.reserve(i + 2);
        for (std::size_t t = 0; t < i; ++t) {
            const auto& r = rows[t];
            sub.push_back({reduce(r.a, r.a(k)), r.b - r.a(k) * ri.b / aik});
        }
        // Bounding box of the eliminated variable, substituted through the
        // equality: +-y_k <= box.
        VectorXd ek = VectorXd::Zero(d);
        ek(k) = 1.0;
        sub.push_back({reduce(ek, 1.0), box - ri.b / aik});
        sub.push_back({reduce(-ek, -1.0), box + ri.b / aik});

        auto sub_opt = seidel(reduce(c, c(k)), std::move(sub), box, rng);
        if (!sub_opt) return std::nullopt;

        double acc = ri.b;
        int t = 0;
        for (int j = 0; j < d; ++j) {
            if (j == k) continue;
            y(j) = (*sub_opt)(t);
            acc -= ri.a(j) * (*sub_opt)(t);
            ++t;
        }
        y(k) = acc / aik;
    }
    return y;
}

} // namespace

LpResult solve_lp(const VectorXd& c, const std::vector<LinearConstraint>& rows,
                  double box) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    auto y = seidel(c, rows, box, rng);
    if (!y) return {false, VectorXd()};
    return {true, *y};
}

MarginResult max_margin(const std::vector<VectorXd>& dirs,
                        const std::vector<double>& offsets, double box) {
    const int n = static_cast<int>(dirs.at(0).size());
    std::vector<LinearConstraint> rows;
    rows.reserve(dirs.size());
    for (std::size_t g = 0; g < dirs.size(); ++g) {
        VectorXd a(n + 1);
        a.head(n) = dirs[g];
        a(n) = 1.0;
        rows.push_back({std::move(a), offsets[g]});
    }
    VectorXd c = VectorXd::Zero(n + 1);
    c(n) = -1.0; // maximize the margin coordinate
    auto res = solve_lp(c, rows, box);
    if (!res.feasible) return {false, VectorXd(), 0.0};
    return {true, res.y.head(n), res.y(n)};
}

} // namespace billiards
