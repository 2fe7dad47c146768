#pragma once

#include <crdual/elasticity_tensor.hpp>
#include <crdual/quadrature.hpp>
#include <crdual/sparse.hpp>
#include <crdual/spaces.hpp>

#include <optional>
#include <vector>

namespace crdual {

/// Numbering of the unconstrained CR degrees of freedom: side s, component i
/// maps to 2 * free_index[s] + i; Dirichlet sides carry kNoIndex.
struct CRDofMap {
    std::vector<Index> free_index;
    Index num_free = 0;

    Index dof(Index s, int component) const { return 2 * free_index[s] + component; }
    Index size() const { return 2 * num_free; }
};

inline CRDofMap cr_dof_map(const Triangulation& mesh)
{
    CRDofMap map;
    map.free_index.assign(mesh.num_sides(), kNoIndex);
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        if (!mesh.is_dirichlet_side(s)) {
            map.free_index[s] = map.num_free++;
        }
    }
    return map;
}

/// Full coefficient vector over all sides (index 2 s + i).
inline Vector to_vector(const CRField& v)
{
    Vector out(2 * v.size());
    for (Index s = 0; s < v.size(); ++s) {
        out(2 * s) = v[s].x();
        out(2 * s + 1) = v[s].y();
    }
    return out;
}

inline CRField from_vector(const Vector& x)
{
    CRField out(x.size() / 2);
    for (Index s = 0; s < out.size(); ++s) {
        out[s] = Vec2(x(2 * s), x(2 * s + 1));
    }
    return out;
}

inline Vector restrict_vector(const CRDofMap& map, const Vector& full)
{
    Vector out(map.size());
    for (Index s = 0; s < static_cast<Index>(map.free_index.size()); ++s) {
        if (map.free_index[s] != kNoIndex) {
            out(map.dof(s, 0)) = full(2 * s);
            out(map.dof(s, 1)) = full(2 * s + 1);
        }
    }
    return out;
}

/// CR field that vanishes on Dirichlet sides from free coefficients.
inline CRField extend_free(const CRDofMap& map, const Vector& free)
{
    CRField out(static_cast<Index>(map.free_index.size()));
    for (Index s = 0; s < out.size(); ++s) {
        if (map.free_index[s] != kNoIndex) {
            out[s] = Vec2(free(map.dof(s, 0)), free(map.dof(s, 1)));
        }
    }
    return out;
}

/// Free-by-free block of a matrix over all CR coefficients.
inline SparseMatrix restrict_matrix(const CRDofMap& map, const SparseMatrix& full)
{
    std::vector<Index> index(full.rows(), kNoIndex);
    for (Index s = 0; s < static_cast<Index>(map.free_index.size()); ++s) {
        if (map.free_index[s] != kNoIndex) {
            index[2 * s] = map.dof(s, 0);
            index[2 * s + 1] = map.dof(s, 1);
        }
    }
    Triplets trip;
    trip.reserve(full.nonZeros());
    for (int k = 0; k < full.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(full, k); it; ++it) {
            const Index r = index[it.row()];
            const Index c = index[it.col()];
            if (r != kNoIndex && c != kNoIndex) {
                trip.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
            }
        }
    }
    SparseMatrix out(map.size(), map.size());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

// ---------------------------------------------------------------- matrices over all sides

/// coeff (grad_h u, grad_h v) for vector CR fields.
inline SparseMatrix vector_laplacian(const Triangulation& mesh, double coeff = 1.0)
{
    const Index n = 2 * mesh.num_sides();
    Triplets trip;
    trip.reserve(18 * mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const double area = mesh.element_geometry(t).area;
        const auto& es = mesh.element_sides(t);
        std::array<Vec2, 3> g;
        for (int k = 0; k < 3; ++k) {
            g[k] = cr_shape_gradient(mesh, t, k);
        }
        for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
                const double a = coeff * area * g[k].dot(g[l]);
                for (int i = 0; i < 2; ++i) {
                    trip.emplace_back(static_cast<int>(2 * es.sides[k] + i), static_cast<int>(2 * es.sides[l] + i), a);
                }
            }
        }
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

/// (C eps_h u, eps_h v).
inline SparseMatrix elastic_stiffness(const Triangulation& mesh, const ElasticityTensor& c)
{
    const Index n = 2 * mesh.num_sides();
    const double mu = c.mu();
    const double lambda = c.lambda();
    Triplets trip;
    trip.reserve(36 * mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const double area = mesh.element_geometry(t).area;
        const auto& es = mesh.element_sides(t);
        std::array<Vec2, 3> g;
        for (int k = 0; k < 3; ++k) {
            g[k] = cr_shape_gradient(mesh, t, k);
        }
        for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        const double e = mu * ((i == j ? g[k].dot(g[l]) : 0.0) + g[k](j) * g[l](i)) +
                                         lambda * g[k](i) * g[l](j);
                        trip.emplace_back(static_cast<int>(2 * es.sides[k] + i), static_cast<int>(2 * es.sides[l] + j),
                                          area * e);
                    }
                }
            }
        }
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

/// Which sides a jump penalty runs over.
enum class JumpSides { Interior, Dirichlet };

/// sum_S (2 mu / h_S) int_S [v].[w] over interior or Dirichlet sides, with
/// two-point Gauss (exact for the quadratic integrand).
inline SparseMatrix jump_stabilization(const Triangulation& mesh, double mu, JumpSides which)
{
    const Index n = 2 * mesh.num_sides();
    const LineRule rule = gauss_legendre(2);
    Triplets trip;
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        const Side& side = mesh.side(s);
        const bool take = which == JumpSides::Interior ? !side.is_boundary() : mesh.is_dirichlet_side(s);
        if (!take) {
            continue;
        }
        // (2 mu / h_S) |S| with h_S = |S|.
        const double weight = 2.0 * mu;
        const Point2 a = mesh.vertex(side.vertices[0]);
        const Point2 b = mesh.vertex(side.vertices[1]);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Point2 x = a + rule.points[q] * (b - a);
            std::array<Index, 6> dofs{};
            std::array<double, 6> coef{};
            int m = 0;
            for (int e = 0; e < 2; ++e) {
                const Index t = side.elements[e];
                if (t == kNoIndex) {
                    continue;
                }
                const auto phi = cr_shape(barycentric_of(mesh, t, x));
                const double sign = e == 0 ? 1.0 : -1.0;
                for (int k = 0; k < 3; ++k) {
                    dofs[m] = mesh.element_sides(t).sides[k];
                    coef[m] = sign * phi[k];
                    ++m;
                }
            }
            for (int p = 0; p < m; ++p) {
                for (int r = 0; r < m; ++r) {
                    const double val = rule.weights[q] * weight * coef[p] * coef[r];
                    for (int i = 0; i < 2; ++i) {
                        trip.emplace_back(static_cast<int>(2 * dofs[p] + i), static_cast<int>(2 * dofs[r] + i), val);
                    }
                }
            }
        }
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

/// Load functional (f_h, Pi_h v) + (F_h, grad_h v) + sum_{S in Neumann} |S| g_S . v_S
/// over all CR coefficients. Empty F_h means zero.
inline Vector load_vector(const Triangulation& mesh, const VectorP0& f, const TensorP0& big_f,
                          const std::vector<Vec2>& g)
{
    Vector out = Vector::Zero(2 * mesh.num_sides());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const double area = mesh.element_geometry(t).area;
        const auto& es = mesh.element_sides(t);
        for (int k = 0; k < 3; ++k) {
            Vec2 val = Vec2::Zero();
            if (!f.empty()) {
                val += area / 3.0 * f[t];
            }
            if (!big_f.empty()) {
                val += area * big_f[t] * cr_shape_gradient(mesh, t, k);
            }
            out(2 * es.sides[k]) += val.x();
            out(2 * es.sides[k] + 1) += val.y();
        }
    }
    if (!g.empty()) {
        for (Index s = 0; s < mesh.num_sides(); ++s) {
            if (mesh.is_neumann_side(s)) {
                const Vec2 val = mesh.side_geometry(s).length * g[s];
                out(2 * s) += val.x();
                out(2 * s + 1) += val.y();
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- Stokes

struct StokesData {
    double nu = 1.0;
    CRField lift;               ///< discrete Dirichlet lift, divergence free
    VectorP0 f;                 ///< element-wise load
    TensorP0 big_f;             ///< element-wise tensor load; empty means zero
    std::vector<Vec2> traction; ///< side-wise Neumann traction (only Neumann entries used)
};

struct StokesDiscreteSolution {
    CRField u; ///< homogeneous part, zero on Dirichlet sides
    ScalarP0 p;
    LinearSolveReport report;
};

/// Saddle point block system [A B^T; B 0] for free velocity coefficients and
/// element pressures, plus a mean-value multiplier when there is no Neumann boundary.
struct StokesSaddleSystem {
    SparseMatrix matrix;
    Vector rhs;
    CRDofMap map;
    bool gauge = false;
    Index num_velocity = 0;
};

namespace detail {

inline double divergence_scale(const Triangulation& mesh, const CRField& v)
{
    double scale = 0.0;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const auto& es = mesh.element_sides(t);
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            sum += mesh.side_geometry(es.sides[k]).length * v[es.sides[k]].norm();
        }
        scale = std::max(scale, sum / mesh.element_geometry(t).area);
    }
    return scale;
}

inline SparseMatrix stokes_matrix(const Triangulation& mesh, double nu, const CRDofMap& map, bool gauge)
{
    const Index nu_dofs = map.size();
    const Index ne = mesh.num_elements();
    const Index n = nu_dofs + ne;
    const SparseMatrix a = restrict_matrix(map, vector_laplacian(mesh, nu));
    Triplets trip;
    trip.reserve(a.nonZeros() + 12 * ne + 2 * ne);
    for (int k = 0; k < a.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (Index t = 0; t < ne; ++t) {
        const auto& es = mesh.element_sides(t);
        for (int k = 0; k < 3; ++k) {
            const Index s = es.sides[k];
            if (map.free_index[s] == kNoIndex) {
                continue;
            }
            if (gauge && t == 0) {
                continue;
            }
            const Vec2 b = -mesh.side_geometry(s).length * mesh.outward_normal(t, k);
            for (int i = 0; i < 2; ++i) {
                trip.emplace_back(static_cast<int>(nu_dofs + t), static_cast<int>(map.dof(s, i)), b(i));
                trip.emplace_back(static_cast<int>(map.dof(s, i)), static_cast<int>(nu_dofs + t), b(i));
            }
        }
    }
    if (gauge) {
        // Pressure is unique up to a constant: pin element 0, shift to zero mean afterwards.
        trip.emplace_back(static_cast<int>(nu_dofs), static_cast<int>(nu_dofs), 1.0);
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

} // namespace detail

inline StokesSaddleSystem assemble_stokes(const Triangulation& mesh, const StokesData& data)
{
    if (mesh.num_dirichlet_sides() == 0) {
        throw Error("assemble_stokes: empty Dirichlet boundary");
    }
    if (data.lift.size() != mesh.num_sides()) {
        throw Error("assemble_stokes: lift does not match the mesh");
    }
    const ScalarP0 div_lift = broken_divergence(mesh, data.lift);
    const double scale = std::max(1.0, detail::divergence_scale(mesh, data.lift));
    for (double d : div_lift) {
        if (std::abs(d) > 1e-10 * scale) {
            throw AdmissibilityError("assemble_stokes: the Dirichlet lift is not divergence free");
        }
    }
    StokesSaddleSystem sys;
    sys.map = cr_dof_map(mesh);
    sys.gauge = mesh.num_neumann_sides() == 0;
    sys.num_velocity = sys.map.size();
    sys.matrix = detail::stokes_matrix(mesh, data.nu, sys.map, sys.gauge);
    const Vector load = load_vector(mesh, data.f, data.big_f, data.traction);
    const Vector lifted = vector_laplacian(mesh, data.nu) * to_vector(data.lift);
    sys.rhs = Vector::Zero(sys.matrix.rows());
    sys.rhs.head(sys.num_velocity) = restrict_vector(sys.map, load - lifted);
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        // (div_h u_h, q) = -(div_h lift, q), which is zero up to roundoff.
        sys.rhs(sys.num_velocity + t) = mesh.element_geometry(t).area * div_lift[t];
    }
    if (sys.gauge) {
        sys.rhs(sys.num_velocity) = 0.0;
    }
    return sys;
}

/// Factorized Stokes operator on one mesh; reused for the load solve and for
/// projections onto discretely divergence-free fields.
class StokesSolver {
public:
    StokesSolver(const Triangulation& mesh, double nu)
        : mesh_(&mesh), nu_(nu), map_(cr_dof_map(mesh)), gauge_(mesh.num_neumann_sides() == 0),
          laplacian_(vector_laplacian(mesh, nu)),
          solver_(detail::stokes_matrix(mesh, nu, map_, gauge_), Factorization::LU)
    {
        if (mesh.num_dirichlet_sides() == 0) {
            throw Error("StokesSolver: empty Dirichlet boundary");
        }
    }

    StokesDiscreteSolution solve(const StokesData& data) const
    {
        StokesSaddleSystem sys = assemble_stokes(*mesh_, data);
        if (std::abs(data.nu - nu_) > 1e-15 * nu_) {
            throw Error("StokesSolver: viscosity mismatch");
        }
        return unpack(solver_.solve(sys.rhs));
    }

    /// Broken-H1 orthogonal projection of v (zeroed on Dirichlet sides) onto
    /// the discretely divergence-free fields vanishing on Dirichlet sides.
    CRField project_divfree(const CRField& v) const
    {
        const CRField v0 = restrict_to_free(*mesh_, v);
        Vector rhs = Vector::Zero(solver_.matrix().rows());
        rhs.head(map_.size()) = restrict_vector(map_, laplacian_ * to_vector(v0));
        return unpack(solver_.solve(rhs)).u;
    }

    const CRDofMap& map() const { return map_; }
    double nu() const { return nu_; }

private:
    StokesDiscreteSolution unpack(const SolveResult& res) const
    {
        StokesDiscreteSolution out;
        out.u = extend_free(map_, res.x.head(map_.size()));
        out.p.assign(mesh_->num_elements(), 0.0);
        for (Index t = 0; t < mesh_->num_elements(); ++t) {
            out.p[t] = res.x(map_.size() + t);
        }
        if (gauge_) {
            double mean = 0.0;
            for (Index t = 0; t < mesh_->num_elements(); ++t) {
                mean += mesh_->element_geometry(t).area * out.p[t];
            }
            mean /= mesh_->total_area();
            for (double& v : out.p) {
                v -= mean;
            }
        }
        out.report = res.report;
        return out;
    }

    const Triangulation* mesh_;
    double nu_;
    CRDofMap map_;
    bool gauge_;
    SparseMatrix laplacian_;
    SparseSolver solver_;
};

inline StokesDiscreteSolution solve_stokes(const Triangulation& mesh, const StokesData& data)
{
    return StokesSolver(mesh, data.nu).solve(data);
}

/// Velocity coefficients (including Dirichlet sides) plus element pressures.
inline Index stokes_num_dof(const Triangulation& mesh)
{
    return 2 * mesh.num_sides() + mesh.num_elements();
}

// ---------------------------------------------------------------- elasticity

struct ElasticityData {
    ElasticityTensor c{1.0, 1.0};
    CRField lift;
    VectorP0 f;
    TensorP0 big_f;
    std::vector<Vec2> traction;
};

struct ElasticityDiscreteSolution {
    CRField u; ///< homogeneous part, zero on Dirichlet sides
    LinearSolveReport report;
};

struct ElasticitySystem {
    SparseMatrix matrix;
    Vector rhs;
    CRDofMap map;
};

/// Operator (C eps_h u, eps_h v) + s_h(u, v). On Dirichlet sides the jump is
/// the trace of the homogeneous part, so the lift only enters through the
/// elastic and interior-jump terms.
inline ElasticitySystem assemble_elasticity(const Triangulation& mesh, const ElasticityData& data)
{
    if (mesh.num_dirichlet_sides() == 0) {
        throw Error("assemble_elasticity: empty Dirichlet boundary");
    }
    if (data.lift.size() != mesh.num_sides()) {
        throw Error("assemble_elasticity: lift does not match the mesh");
    }
    const double mu = data.c.mu();
    const SparseMatrix lifted_part =
        elastic_stiffness(mesh, data.c) + jump_stabilization(mesh, mu, JumpSides::Interior);
    const SparseMatrix full = lifted_part + jump_stabilization(mesh, mu, JumpSides::Dirichlet);
    ElasticitySystem sys;
    sys.map = cr_dof_map(mesh);
    sys.matrix = restrict_matrix(sys.map, full);
    const Vector load = load_vector(mesh, data.f, data.big_f, data.traction);
    sys.rhs = restrict_vector(sys.map, load - lifted_part * to_vector(data.lift));
    return sys;
}

inline ElasticityDiscreteSolution solve_elasticity(const Triangulation& mesh, const ElasticityData& data)
{
    const ElasticitySystem sys = assemble_elasticity(mesh, data);
    const SolveResult res = solve_sparse(sys.matrix, sys.rhs, Factorization::Cholesky);
    return {extend_free(sys.map, res.x), res.report};
}

/// s_h(u_total, v) with interior jumps of u_total and Dirichlet traces of u_total - lift.
inline Vector stabilization_action(const Triangulation& mesh, double mu, const CRField& u_total,
                                   const CRField& lift)
{
    return jump_stabilization(mesh, mu, JumpSides::Interior) * to_vector(u_total) +
           jump_stabilization(mesh, mu, JumpSides::Dirichlet) * to_vector(u_total - lift);
}

struct LiftingSolution {
    CRField r;
    LinearSolveReport report;
};

/// r_h in V_D^h with (grad_h r_h, grad_h v_h) = s_h(u_total, v_h) for all v_h in V_D^h.
/// An empty lift means zero Dirichlet data.
inline LiftingSolution solve_lifting(const Triangulation& mesh, double mu, const CRField& u_total,
                                     const CRField& lift = CRField())
{
    if (mesh.num_dirichlet_sides() == 0) {
        throw SolverError("solve_lifting: empty Dirichlet boundary");
    }
    const CRField l = lift.size() == 0 ? CRField::zero(mesh) : lift;
    const CRDofMap map = cr_dof_map(mesh);
    const SparseMatrix k = restrict_matrix(map, vector_laplacian(mesh, 1.0));
    const Vector rhs = restrict_vector(map, stabilization_action(mesh, mu, u_total, l));
    const SolveResult res = solve_sparse(k, rhs, Factorization::Cholesky);
    return {extend_free(map, res.x), res.report};
}

inline Index elasticity_num_dof(const Triangulation& mesh)
{
    return 2 * mesh.num_sides();
}

} // namespace crdual
