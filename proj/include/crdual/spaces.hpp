#pragma once

#include <crdual/mesh.hpp>
#include <crdual/quadrature.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

namespace crdual {

/// Side-point count for non-polynomial data on sides (exact to degree 15).
inline constexpr int kDataSidePoints = 8;

/// Vector Crouzeix-Raviart field: the midpoint value on every side.
struct CRField {
    std::vector<Vec2> values;

    CRField() = default;
    explicit CRField(Index num_sides) : values(num_sides, Vec2::Zero()) {}
    static CRField zero(const Triangulation& mesh) { return CRField(mesh.num_sides()); }

    Index size() const { return static_cast<Index>(values.size()); }
    Vec2& operator[](Index s) { return values[s]; }
    const Vec2& operator[](Index s) const { return values[s]; }
};

inline CRField operator+(const CRField& a, const CRField& b)
{
    CRField r = a;
    for (Index s = 0; s < r.size(); ++s) {
        r[s] += b[s];
    }
    return r;
}

inline CRField operator-(const CRField& a, const CRField& b)
{
    CRField r = a;
    for (Index s = 0; s < r.size(); ++s) {
        r[s] -= b[s];
    }
    return r;
}

inline CRField operator*(double alpha, const CRField& a)
{
    CRField r = a;
    for (auto& v : r.values) {
        v *= alpha;
    }
    return r;
}

/// Row-wise lowest-order Raviart-Thomas tensor field. flux[s](i) is the normal
/// component of row i on side s against the global side normal.
struct RTField {
    std::vector<Vec2> flux;

    RTField() = default;
    explicit RTField(Index num_sides) : flux(num_sides, Vec2::Zero()) {}
    static RTField zero(const Triangulation& mesh) { return RTField(mesh.num_sides()); }

    Index size() const { return static_cast<Index>(flux.size()); }
};

inline RTField operator+(const RTField& a, const RTField& b)
{
    RTField r = a;
    for (Index s = 0; s < r.size(); ++s) {
        r.flux[s] += b.flux[s];
    }
    return r;
}

inline RTField operator-(const RTField& a, const RTField& b)
{
    RTField r = a;
    for (Index s = 0; s < r.size(); ++s) {
        r.flux[s] -= b.flux[s];
    }
    return r;
}

inline RTField operator*(double alpha, const RTField& a)
{
    RTField r = a;
    for (auto& f : r.flux) {
        f *= alpha;
    }
    return r;
}

/// Local form of an RT tensor on one element: row_i(x) = a_i + c_i (x - centroid).
/// `value` holds the rows a_i, i.e. the tensor at the centroid.
struct RTLocal {
    Mat2 value = Mat2::Zero();
    Vec2 slope = Vec2::Zero();

    Mat2 at(const Point2& x, const Point2& centroid) const
    {
        return value + outer(slope, x - centroid);
    }
};

/// Conforming P1 vector field: one value per vertex.
struct P1Field {
    std::vector<Vec2> values;

    Index size() const { return static_cast<Index>(values.size()); }
};

/// Element-wise affine vector field stored by its values at the three local vertices.
struct BrokenP1Field {
    std::vector<std::array<Vec2, 3>> values;
};

// ---------------------------------------------------------------- quadrature

/// Integral of f over element t with the given rule.
template <class F>
auto integrate_element(const Triangulation& mesh, Index t, const TriangleRule& rule, F&& f)
{
    const Point2 a = mesh.element_vertex(t, 0);
    const Point2 b = mesh.element_vertex(t, 1);
    const Point2 c = mesh.element_vertex(t, 2);
    using Value = std::decay_t<decltype(f(a))>;
    Value sum = f(barycentric_point(rule.barycentric[0], a, b, c)) * rule.weights[0];
    for (std::size_t q = 1; q < rule.size(); ++q) {
        sum += f(barycentric_point(rule.barycentric[q], a, b, c)) * rule.weights[q];
    }
    return Value(sum * mesh.element_geometry(t).area);
}

/// Integral of f over element t when f has an integrable singularity at local
/// vertex k: midpoint subdivision, recursing only into the child at that vertex.
template <class F>
auto integrate_element_graded(const Triangulation& mesh, Index t, const TriangleRule& rule, F&& f, int k,
                              int levels = 40)
{
    std::array<Point2, 3> v = {mesh.element_vertex(t, k), mesh.element_vertex(t, (k + 1) % 3),
                               mesh.element_vertex(t, (k + 2) % 3)};
    using Value = std::decay_t<decltype(f(v[0]))>;
    const auto on = [&](const Point2& a, const Point2& b, const Point2& c) {
        const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
        Value sum = f(barycentric_point(rule.barycentric[0], a, b, c)) * rule.weights[0];
        for (std::size_t q = 1; q < rule.size(); ++q) {
            sum += f(barycentric_point(rule.barycentric[q], a, b, c)) * rule.weights[q];
        }
        return Value(sum * area);
    };
    Value total = on(v[0], v[1], v[2]) * 0.0;
    for (int l = 0; l < levels; ++l) {
        const Point2 m01 = 0.5 * (v[0] + v[1]);
        const Point2 m02 = 0.5 * (v[0] + v[2]);
        const Point2 m12 = 0.5 * (v[1] + v[2]);
        total += on(m01, v[1], m12) + on(m02, m12, v[2]) + on(m01, m12, m02);
        v = {v[0], m01, m02};
    }
    return Value(total + on(v[0], v[1], v[2]));
}

/// Integral of f over side s with n-point Gauss.
template <class F>
auto integrate_side(const Triangulation& mesh, Index s, const LineRule& rule, F&& f)
{
    const Side& side = mesh.side(s);
    const Point2 a = mesh.vertex(side.vertices[0]);
    const Point2 b = mesh.vertex(side.vertices[1]);
    using Value = std::decay_t<decltype(f(a))>;
    Value sum = f(Point2(a + rule.points[0] * (b - a))) * rule.weights[0];
    for (std::size_t q = 1; q < rule.points.size(); ++q) {
        sum += f(Point2(a + rule.points[q] * (b - a))) * rule.weights[q];
    }
    return Value(sum * mesh.side_geometry(s).length);
}

// ---------------------------------------------------------------- projections

/// Element averages (1/|T|) int_T f with a rule of the given exactness degree.
template <class F>
auto pi0(const Triangulation& mesh, F&& f, int degree = kDataDegree)
{
    using Value = std::decay_t<decltype(f(Point2()))>;
    const TriangleRule rule = triangle_rule(degree);
    P0Field<Value> out;
    out.reserve(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        out.push_back(Value(integrate_element(mesh, t, rule, f) / mesh.element_geometry(t).area));
    }
    return out;
}

/// Side average (1/|S|) int_S f.
template <class F>
auto pi_side(const Triangulation& mesh, F&& f, Index s, int points = kDataSidePoints)
{
    using Value = std::decay_t<decltype(f(Point2()))>;
    const LineRule rule = gauss_legendre(points);
    return Value(integrate_side(mesh, s, rule, f) / mesh.side_geometry(s).length);
}

/// Side averages on every side.
template <class F>
auto pi_sides(const Triangulation& mesh, F&& f, int points = kDataSidePoints)
{
    using Value = std::decay_t<decltype(f(Point2()))>;
    const LineRule rule = gauss_legendre(points);
    std::vector<Value> out;
    out.reserve(mesh.num_sides());
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        out.push_back(Value(integrate_side(mesh, s, rule, f) / mesh.side_geometry(s).length));
    }
    return out;
}

// ---------------------------------------------------------------- CR

/// Values of the CR shape functions 1 - 2 lambda_k.
inline std::array<double, 3> cr_shape(const std::array<double, 3>& lambda)
{
    return {1.0 - 2.0 * lambda[0], 1.0 - 2.0 * lambda[1], 1.0 - 2.0 * lambda[2]};
}

/// Gradient of the local CR shape function attached to local side k.
inline Vec2 cr_shape_gradient(const Triangulation& mesh, Index t, int k)
{
    const Index s = mesh.element_sides(t).sides[k];
    return mesh.side_geometry(s).length / mesh.element_geometry(t).area * mesh.outward_normal(t, k);
}

/// Barycentric coordinates of x in element t.
inline std::array<double, 3> barycentric_of(const Triangulation& mesh, Index t, const Point2& x)
{
    const Point2 a = mesh.element_vertex(t, 0);
    const Point2 b = mesh.element_vertex(t, 1);
    const Point2 c = mesh.element_vertex(t, 2);
    Mat2 m;
    m.col(0) = b - a;
    m.col(1) = c - a;
    const Vec2 l = m.inverse() * (x - a);
    return {1.0 - l.x() - l.y(), l.x(), l.y()};
}

/// Evaluates the local affine of v on element t at barycentric coordinates lambda.
inline Vec2 cr_eval(const Triangulation& mesh, const CRField& v, Index t, const std::array<double, 3>& lambda)
{
    const auto phi = cr_shape(lambda);
    const auto& es = mesh.element_sides(t);
    return phi[0] * v[es.sides[0]] + phi[1] * v[es.sides[1]] + phi[2] * v[es.sides[2]];
}

/// Values of the local affine of v at the three local vertices of t.
inline std::array<Vec2, 3> cr_vertex_values(const Triangulation& mesh, const CRField& v, Index t)
{
    const auto& es = mesh.element_sides(t);
    const Vec2 sum = v[es.sides[0]] + v[es.sides[1]] + v[es.sides[2]];
    return {sum - 2.0 * v[es.sides[0]], sum - 2.0 * v[es.sides[1]], sum - 2.0 * v[es.sides[2]]};
}

/// Gauss rule on [0,1] refined geometrically towards 0, for integrands with an
/// algebraic endpoint singularity.
inline LineRule graded_rule(int points, int levels = 48)
{
    const LineRule base = gauss_legendre(points);
    LineRule out;
    double hi = 1.0;
    for (int l = 0; l < levels; ++l) {
        const double lo = (l + 1 == levels) ? 0.0 : 0.5 * hi;
        for (std::size_t q = 0; q < base.points.size(); ++q) {
            out.points.push_back(lo + (hi - lo) * base.points[q]);
            out.weights.push_back((hi - lo) * base.weights[q]);
        }
        hi = lo;
    }
    return out;
}

/// Side average of f; a side ending at `singular` is integrated with a graded rule.
template <class F>
auto side_average(const Triangulation& mesh, F&& f, Index s, int points,
                  const std::optional<Point2>& singular = std::nullopt)
{
    const Side& side = mesh.side(s);
    Point2 a = mesh.vertex(side.vertices[0]);
    Point2 b = mesh.vertex(side.vertices[1]);
    const double tol = 1e-14 * (b - a).norm();
    const bool at_a = singular && (a - *singular).norm() <= tol;
    const bool at_b = singular && (b - *singular).norm() <= tol;
    if (!at_a && !at_b) {
        return pi_side(mesh, f, s, points);
    }
    if (at_b) {
        std::swap(a, b);
    }
    const LineRule rule = graded_rule(points);
    using Value = std::decay_t<decltype(f(a))>;
    Value sum = f(Point2(a + rule.points[0] * (b - a))) * rule.weights[0];
    for (std::size_t q = 1; q < rule.points.size(); ++q) {
        sum += f(Point2(a + rule.points[q] * (b - a))) * rule.weights[q];
    }
    return Value(sum);
}

/// Canonical CR interpolation: side averages of v.
template <class F>
CRField cr_interpolate(const Triangulation& mesh, F&& v, int points = kDataSidePoints,
                       const std::optional<Point2>& singular = std::nullopt)
{
    CRField out(mesh.num_sides());
    const auto g = [&](const Point2& x) { return Vec2(v(x)); };
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        out[s] = side_average(mesh, g, s, points, singular);
    }
    return out;
}

/// Zeroes the values on Dirichlet sides.
inline CRField restrict_to_free(const Triangulation& mesh, CRField v)
{
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        if (mesh.is_dirichlet_side(s)) {
            v[s].setZero();
        }
    }
    return v;
}

inline Mat2 broken_gradient(const Triangulation& mesh, const CRField& v, Index t)
{
    Mat2 g = Mat2::Zero();
    const auto& es = mesh.element_sides(t);
    for (int k = 0; k < 3; ++k) {
        g += outer(v[es.sides[k]], cr_shape_gradient(mesh, t, k));
    }
    return g;
}

inline TensorP0 broken_gradient(const Triangulation& mesh, const CRField& v)
{
    TensorP0 out(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        out[t] = broken_gradient(mesh, v, t);
    }
    return out;
}

inline TensorP0 broken_sym_gradient(const Triangulation& mesh, const CRField& v)
{
    TensorP0 out = broken_gradient(mesh, v);
    for (auto& g : out) {
        g = sym(g);
    }
    return out;
}

/// div_h through the side form (1/|T|) sum_k |E_k| v_k . n_k.
inline ScalarP0 broken_divergence(const Triangulation& mesh, const CRField& v)
{
    ScalarP0 out(mesh.num_elements(), 0.0);
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const auto& es = mesh.element_sides(t);
        double d = 0.0;
        for (int k = 0; k < 3; ++k) {
            d += mesh.side_geometry(es.sides[k]).length * v[es.sides[k]].dot(mesh.outward_normal(t, k));
        }
        out[t] = d / mesh.element_geometry(t).area;
    }
    return out;
}

/// Element averages of a CR field (the value at the centroid).
inline VectorP0 cr_cellaverage(const Triangulation& mesh, const CRField& v)
{
    VectorP0 out(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const auto& es = mesh.element_sides(t);
        out[t] = (v[es.sides[0]] + v[es.sides[1]] + v[es.sides[2]]) / 3.0;
    }
    return out;
}

// ---------------------------------------------------------------- RT

/// Local representation of tau on element t.
inline RTLocal rt_local(const Triangulation& mesh, const RTField& tau, Index t)
{
    const auto& g = mesh.element_geometry(t);
    const auto& es = mesh.element_sides(t);
    RTLocal out;
    for (int k = 0; k < 3; ++k) {
        const Index s = es.sides[k];
        // psi_k = sign |E_k| / (2|T|) (x - P_k) with P_k the vertex opposite side k.
        const double scale = es.signs[k] * mesh.side_geometry(s).length / (2.0 * g.area);
        const Vec2 offset = g.centroid - mesh.element_vertex(t, k);
        for (int i = 0; i < 2; ++i) {
            out.value.row(i) += tau.flux[s](i) * scale * offset.transpose();
            out.slope(i) += tau.flux[s](i) * scale;
        }
    }
    return out;
}

inline std::vector<RTLocal> rt_locals(const Triangulation& mesh, const RTField& tau)
{
    std::vector<RTLocal> out(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        out[t] = rt_local(mesh, tau, t);
    }
    return out;
}

inline Mat2 rt_eval(const Triangulation& mesh, const RTField& tau, Index t, const Point2& x)
{
    return rt_local(mesh, tau, t).at(x, mesh.element_geometry(t).centroid);
}

/// Row-wise divergence, 2 c_i on every element.
inline VectorP0 rt_divergence(const Triangulation& mesh, const RTField& tau)
{
    VectorP0 out(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        out[t] = 2.0 * rt_local(mesh, tau, t).slope;
    }
    return out;
}

/// Element averages, i.e. the tensor at the centroid.
inline TensorP0 rt_cellaverage(const Triangulation& mesh, const RTField& tau)
{
    TensorP0 out(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        out[t] = rt_local(mesh, tau, t).value;
    }
    return out;
}

/// Normal fluxes of element-wise local tensors against the global normals.
struct RTAssembly {
    RTField field;
    double max_jump = 0.0;
};

/// Builds an RT field from broken local tensors (fluxes taken from elements[0])
/// and records the largest interior normal-flux mismatch.
inline RTAssembly rt_from_locals(const Triangulation& mesh, const std::vector<RTLocal>& locals)
{
    RTAssembly out{RTField(mesh.num_sides()), 0.0};
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        const Side& side = mesh.side(s);
        const Point2& mid = mesh.side_geometry(s).midpoint;
        const Vec2& n = side.normal;
        const Index t0 = side.elements[0];
        const Vec2 f0 = locals[t0].at(mid, mesh.element_geometry(t0).centroid) * n;
        out.field.flux[s] = f0;
        if (!side.is_boundary()) {
            const Index t1 = side.elements[1];
            const Vec2 f1 = locals[t1].at(mid, mesh.element_geometry(t1).centroid) * n;
            out.max_jump = std::max(out.max_jump, (f0 - f1).cwiseAbs().maxCoeff());
        }
    }
    return out;
}

/// Canonical RT interpolation: side averages of the row-wise normal components.
template <class F>
RTField rt_interpolate(const Triangulation& mesh, F&& tau, int points = kDataSidePoints)
{
    RTField out(mesh.num_sides());
    const LineRule rule = gauss_legendre(points);
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        const Vec2 n = mesh.side(s).normal;
        out.flux[s] = integrate_side(mesh, s, rule, [&](const Point2& x) { return Vec2(Mat2(tau(x)) * n); }) /
                      mesh.side_geometry(s).length;
    }
    return out;
}

/// Largest |row_i . n - g_i| over Neumann sides.
inline double rt_neumann_residual(const Triangulation& mesh, const RTField& tau, const std::vector<Vec2>& g)
{
    double r = 0.0;
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        if (mesh.is_neumann_side(s)) {
            r = std::max(r, (tau.flux[s] - g[s]).cwiseAbs().maxCoeff());
        }
    }
    return r;
}

// ---------------------------------------------------------------- jumps

/// Values of a linear function on a side at its two endpoints (side vertex order).
using SideTrace = std::array<Vec2, 2>;

namespace detail {

inline SideTrace trace_on(const Triangulation& mesh, Index t, Index s, const std::array<Vec2, 3>& vertex_values)
{
    const Side& side = mesh.side(s);
    SideTrace out;
    for (int e = 0; e < 2; ++e) {
        const auto& verts = mesh.element(t).vertices;
        const int j = static_cast<int>(std::find(verts.begin(), verts.end(), side.vertices[e]) - verts.begin());
        out[e] = vertex_values[j];
    }
    return out;
}

template <class VertexValues>
SideTrace jump_impl(const Triangulation& mesh, Index s, VertexValues&& values_on)
{
    const Side& side = mesh.side(s);
    SideTrace a = trace_on(mesh, side.elements[0], s, values_on(side.elements[0]));
    if (side.is_boundary()) {
        return a;
    }
    const SideTrace b = trace_on(mesh, side.elements[1], s, values_on(side.elements[1]));
    a[0] -= b[0];
    a[1] -= b[1];
    return a;
}

} // namespace detail

/// Jump across s, trace of elements[0] minus trace of elements[1]; the trace on boundary sides.
inline SideTrace jump_eval(const Triangulation& mesh, const CRField& v, Index s)
{
    return detail::jump_impl(mesh, s, [&](Index t) { return cr_vertex_values(mesh, v, t); });
}

inline SideTrace jump_eval(const Triangulation& mesh, const BrokenP1Field& v, Index s)
{
    return detail::jump_impl(mesh, s, [&](Index t) { return v.values[t]; });
}

inline BrokenP1Field to_broken(const Triangulation& mesh, const CRField& v)
{
    BrokenP1Field out;
    out.values.resize(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        out.values[t] = cr_vertex_values(mesh, v, t);
    }
    return out;
}

inline BrokenP1Field to_broken(const Triangulation& mesh, const P1Field& v)
{
    BrokenP1Field out;
    out.values.resize(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const auto& e = mesh.element(t).vertices;
        out.values[t] = {v.values[e[0]], v.values[e[1]], v.values[e[2]]};
    }
    return out;
}

// ---------------------------------------------------------------- P1

/// Gradients of the barycentric coordinates of element t.
inline std::array<Vec2, 3> barycentric_gradients(const Triangulation& mesh, Index t)
{
    std::array<Vec2, 3> out;
    for (int k = 0; k < 3; ++k) {
        out[k] = -0.5 * cr_shape_gradient(mesh, t, k);
    }
    return out;
}

inline Mat2 p1_gradient(const Triangulation& mesh, const P1Field& v, Index t)
{
    const auto grads = barycentric_gradients(mesh, t);
    const auto& e = mesh.element(t).vertices;
    Mat2 g = Mat2::Zero();
    for (int k = 0; k < 3; ++k) {
        g += outer(v.values[e[k]], grads[k]);
    }
    return g;
}

inline Vec2 p1_eval(const Triangulation& mesh, const P1Field& v, Index t, const std::array<double, 3>& lambda)
{
    const auto& e = mesh.element(t).vertices;
    return lambda[0] * v.values[e[0]] + lambda[1] * v.values[e[1]] + lambda[2] * v.values[e[2]];
}

/// Conforming P1 field by averaging the local vertex values of all adjacent
/// elements; vertices on the closure of the Dirichlet boundary take the
/// supplied data, which must be present for each of them.
inline P1Field nodal_average(const Triangulation& mesh, const BrokenP1Field& v,
                             const std::vector<std::optional<Vec2>>& dirichlet_values)
{
    const Index nv = mesh.num_vertices();
    P1Field out{std::vector<Vec2>(nv, Vec2::Zero())};
    std::vector<int> count(nv, 0);
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const auto& e = mesh.element(t).vertices;
        for (int k = 0; k < 3; ++k) {
            out.values[e[k]] += v.values[t][k];
            ++count[e[k]];
        }
    }
    const auto& dirichlet = mesh.dirichlet_vertex_mask();
    for (Index i = 0; i < nv; ++i) {
        if (dirichlet[i]) {
            if (i >= static_cast<Index>(dirichlet_values.size()) || !dirichlet_values[i]) {
                throw Error("nodal_average: missing Dirichlet value at a boundary vertex");
            }
            out.values[i] = *dirichlet_values[i];
        }
        else if (count[i] > 0) {
            out.values[i] /= count[i];
        }
    }
    return out;
}

inline P1Field nodal_average(const Triangulation& mesh, const CRField& v,
                             const std::vector<std::optional<Vec2>>& dirichlet_values)
{
    return nodal_average(mesh, to_broken(mesh, v), dirichlet_values);
}

/// Dirichlet vertex data sampled from a function.
inline std::vector<std::optional<Vec2>> dirichlet_vertex_values(const Triangulation& mesh,
                                                                const std::function<Vec2(const Point2&)>& g)
{
    std::vector<std::optional<Vec2>> out(mesh.num_vertices());
    const auto& mask = mesh.dirichlet_vertex_mask();
    for (Index i = 0; i < mesh.num_vertices(); ++i) {
        if (mask[i]) {
            out[i] = g(mesh.vertex(i));
        }
    }
    return out;
}

inline P1Field p1_interpolate(const Triangulation& mesh, const std::function<Vec2(const Point2&)>& g)
{
    P1Field out{std::vector<Vec2>(mesh.num_vertices())};
    for (Index i = 0; i < mesh.num_vertices(); ++i) {
        out.values[i] = g(mesh.vertex(i));
    }
    return out;
}

// ---------------------------------------------------------------- P0 helpers

/// sum_T |T| A_T : B_T.
inline double l2_product(const Triangulation& mesh, const TensorP0& a, const TensorP0& b)
{
    double sum = 0.0;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        sum += mesh.element_geometry(t).area * ddot(a[t], b[t]);
    }
    return sum;
}

inline double l2_product(const Triangulation& mesh, const VectorP0& a, const VectorP0& b)
{
    double sum = 0.0;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        sum += mesh.element_geometry(t).area * a[t].dot(b[t]);
    }
    return sum;
}

inline double l2_norm_squared(const Triangulation& mesh, const TensorP0& a)
{
    return l2_product(mesh, a, a);
}

template <class V>
P0Field<V> operator-(const P0Field<V>& a, const P0Field<V>& b)
{
    P0Field<V> r = a;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] -= b[i];
    }
    return r;
}

template <class V>
P0Field<V> operator+(const P0Field<V>& a, const P0Field<V>& b)
{
    P0Field<V> r = a;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] += b[i];
    }
    return r;
}

inline TensorP0 dev(const TensorP0& a)
{
    TensorP0 r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = dev(a[i]);
    }
    return r;
}

} // namespace crdual
