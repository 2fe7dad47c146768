#pragma once

#include <crdual/types.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace crdual {

/// Gauss-Legendre rule on [0, 1]; weights sum to one.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// Rule on a triangle in barycentric coordinates; weights sum to one (multiply by the area).
struct TriangleRule {
    std::vector<std::array<double, 3>> barycentric;
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return weights.size(); }
};

/// Exactness degrees used throughout: products of broken affine fields need 2,
/// manufactured trigonometric data is integrated with the degree-10 rule.
inline constexpr int kPolynomialDegree = 2;
inline constexpr int kDataDegree = 10;
inline constexpr int kSidePoints = 4;

inline LineRule gauss_legendre(int n)
{
    if (n < 1) {
        throw Error("gauss_legendre: need at least one point");
    }
    LineRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p0 = 1.0;
                p1 = x;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        {
            // Recompute the derivative at the converged node.
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1, 1] -> [0, 1].
        rule.points[i] = 0.5 * (1.0 - x);
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) {
        rule.points[n / 2] = 0.5;
    }
    return rule;
}

/// Symmetric three-point rule, exact for quadratics.
inline TriangleRule triangle_rule_degree2()
{
    TriangleRule rule;
    rule.degree = 2;
    rule.barycentric = {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                        {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                        {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};
    rule.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return rule;
}

/// Collapsed (Duffy) Gauss product rule exact for polynomials of the given degree.
inline TriangleRule triangle_rule(int degree)
{
    if (degree <= 2) {
        return triangle_rule_degree2();
    }
    const int n = (degree + 3) / 2;
    const LineRule gl = gauss_legendre(n);
    TriangleRule rule;
    rule.degree = degree;
    rule.barycentric.reserve(n * n);
    rule.weights.reserve(n * n);
    // x = s, y = t (1 - s) on the reference triangle, Jacobian (1 - s), area 1/2.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double s = gl.points[i];
            const double t = gl.points[j];
            const double x = s;
            const double y = t * (1.0 - s);
            rule.barycentric.push_back({1.0 - x - y, x, y});
            rule.weights.push_back(2.0 * gl.weights[i] * gl.weights[j] * (1.0 - s));
        }
    }
    return rule;
}

/// Physical point of barycentric coordinates on triangle (a, b, c).
inline Point2 barycentric_point(const std::array<double, 3>& lambda, const Point2& a,
                                const Point2& b, const Point2& c)
{
    return lambda[0] * a + lambda[1] * b + lambda[2] * c;
}

} // namespace crdual
