#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crdual {

using Index = std::int64_t;
inline constexpr Index kNoIndex = -1;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Point2 = Eigen::Vector2d;

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or non-conforming mesh input.
class MeshError : public Error {
public:
    using Error::Error;
};

/// Singular system or residual above tolerance.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A field violates a constraint it is required to satisfy (divergence, normal continuity, traces).
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// Element-wise constant fields: one value per element.
template <class Value>
using P0Field = std::vector<Value>;

using ScalarP0 = P0Field<double>;
using VectorP0 = P0Field<Vec2>;
using TensorP0 = P0Field<Mat2>;

/// Deviatoric part in two dimensions, A - tr(A)/2 I.
inline Mat2 dev(const Mat2& a)
{
    return a - 0.5 * a.trace() * Mat2::Identity();
}

inline Mat2 sym(const Mat2& a)
{
    return 0.5 * (a + a.transpose());
}

inline Mat2 skew(const Mat2& a)
{
    return 0.5 * (a - a.transpose());
}

/// Frobenius product A : B.
inline double ddot(const Mat2& a, const Mat2& b)
{
    return (a.array() * b.array()).sum();
}

/// Rows of the tensor are the components: (grad v)_{ij} = d_j v_i.
inline Mat2 outer(const Vec2& a, const Vec2& b)
{
    return a * b.transpose();
}

} // namespace crdual
