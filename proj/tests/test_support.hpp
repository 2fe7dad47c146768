#pragma once

#include <crdual/mesh.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace crdual::testing {

inline Labeler all_dirichlet()
{
    return [](const Point2&) { return BoundaryLabel::Dirichlet; };
}

/// Dirichlet on x = 0 and x = 1, Neumann on y = 0 and y = 1.
inline Labeler mixed_square_labels()
{
    return [](const Point2& m) {
        return (std::abs(m.x()) < 1e-12 || std::abs(m.x() - 1.0) < 1e-12) ? BoundaryLabel::Dirichlet
                                                                          : BoundaryLabel::Neumann;
    };
}

/// Each index in [0, n) independently with probability p.
inline std::vector<Index> random_subset(Index n, double p, std::mt19937_64& rng)
{
    std::bernoulli_distribution pick(p);
    std::vector<Index> out;
    for (Index i = 0; i < n; ++i) {
        if (pick(rng)) {
            out.push_back(i);
        }
    }
    return out;
}

inline Mat2 random_matrix(std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> d(-scale, scale);
    Mat2 m;
    m << d(rng), d(rng), d(rng), d(rng);
    return m;
}

inline Vec2 random_vector(std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> d(-scale, scale);
    return {d(rng), d(rng)};
}

} // namespace crdual::testing
