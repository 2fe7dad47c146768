#pragma once

#include <crdual/elasticity_tensor.hpp>
#include <crdual/forms.hpp>
#include <crdual/quadrature.hpp>
#include <crdual/spaces.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace crdual {

/// Normal-jump tolerance for reconstructions, relative to the largest flux.
inline constexpr double kJumpTolerance = 1e-8;

namespace detail {

inline double max_flux(const RTField& tau)
{
    double m = 0.0;
    for (const auto& f : tau.flux) {
        m = std::max(m, f.cwiseAbs().maxCoeff());
    }
    return m;
}

inline RTAssembly checked_assembly(const Triangulation& mesh, const std::vector<RTLocal>& locals,
                                   const char* what)
{
    RTAssembly out = rt_from_locals(mesh, locals);
    if (out.max_jump > kJumpTolerance * std::max(1.0, max_flux(out.field))) {
        throw AdmissibilityError(std::string(what) + ": normal fluxes do not match across a side");
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------- Stokes reconstruction

/// T_h = nu grad_h(u_h + lift) - p_h I - F_h - f_h (x - x_T) / 2 as an RT field.
/// An empty F_h means zero; with a tensor load the result represents T_h - F_h.
inline RTAssembly marini_stokes(const Triangulation& mesh, const CRField& u, const ScalarP0& p,
                                const CRField& lift, const VectorP0& f, double nu,
                                const TensorP0& big_f = {})
{
    std::vector<RTLocal> locals(mesh.num_elements());
    const CRField total = u + lift;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        locals[t].value = nu * broken_gradient(mesh, total, t) - p[t] * Mat2::Identity();
        if (!big_f.empty()) {
            locals[t].value -= big_f[t];
        }
        locals[t].slope = f.empty() ? Vec2::Zero() : Vec2(-0.5 * f[t]);
    }
    return detail::checked_assembly(mesh, locals, "marini_stokes");
}

/// Primal CR solution from a dual stress and the element averages u_bar:
/// u_h = u_bar + ((1/nu) dev Pi_h T_h - grad_h lift)(x - x_T).
inline CRField marini_stokes_inverse(const Triangulation& mesh, const RTField& stress, const VectorP0& u_bar,
                                     const CRField& lift, double nu, const TensorP0& big_f = {})
{
    const TensorP0 avg = rt_cellaverage(mesh, stress);
    std::vector<Mat2> grad(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        Mat2 m = avg[t];
        if (!big_f.empty()) {
            m += big_f[t];
        }
        grad[t] = dev(m) / nu - broken_gradient(mesh, lift, t);
    }
    CRField out(mesh.num_sides());
    double jump = 0.0;
    double scale = 0.0;
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        const Side& side = mesh.side(s);
        const Point2& mid = mesh.side_geometry(s).midpoint;
        const auto eval = [&](Index t) {
            return Vec2(u_bar[t] + grad[t] * (mid - mesh.element_geometry(t).centroid));
        };
        out[s] = eval(side.elements[0]);
        scale = std::max(scale, out[s].cwiseAbs().maxCoeff());
        if (!side.is_boundary()) {
            jump = std::max(jump, (out[s] - eval(side.elements[1])).cwiseAbs().maxCoeff());
        }
    }
    if (jump > kJumpTolerance * std::max(1.0, scale)) {
        throw AdmissibilityError("marini_stokes_inverse: result is not a Crouzeix-Raviart function");
    }
    return out;
}

// ---------------------------------------------------------------- elasticity reconstruction

/// sigma*_h = C eps_h(u_h + lift) + grad_h r_h - F_h - f_h (x - x_T) / 2.
/// The row-wise correction keeps the field in RT; see the test suite for the
/// symmetric variant, which is not normal-continuous.
inline RTAssembly marini_elasticity(const Triangulation& mesh, const CRField& u, const CRField& lift,
                                    const CRField& r, const VectorP0& f, const ElasticityTensor& c,
                                    const TensorP0& big_f = {})
{
    std::vector<RTLocal> locals(mesh.num_elements());
    const CRField total = u + lift;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        locals[t].value = c.apply(sym(broken_gradient(mesh, total, t))) + broken_gradient(mesh, r, t);
        if (!big_f.empty()) {
            locals[t].value -= big_f[t];
        }
        locals[t].slope = f.empty() ? Vec2::Zero() : Vec2(-0.5 * f[t]);
    }
    return detail::checked_assembly(mesh, locals, "marini_elasticity");
}

// ---------------------------------------------------------------- solved states

struct StokesSolution {
    CRField u;    ///< homogeneous part
    CRField lift; ///< discrete Dirichlet lift
    ScalarP0 p;
    RTField stress;
    double nu = 1.0;
    VectorP0 f;
    std::vector<Vec2> traction;
    double max_jump = 0.0;
    LinearSolveReport report;

    CRField total() const { return u + lift; }
};

inline StokesSolution solve_and_reconstruct_stokes(const Triangulation& mesh, const StokesData& data,
                                                   const StokesSolver* solver = nullptr)
{
    StokesDiscreteSolution d = solver ? solver->solve(data) : solve_stokes(mesh, data);
    StokesSolution out;
    out.u = std::move(d.u);
    out.p = std::move(d.p);
    out.lift = data.lift;
    out.nu = data.nu;
    out.f = data.f;
    out.traction = data.traction;
    out.report = d.report;
    RTAssembly t = marini_stokes(mesh, out.u, out.p, out.lift, data.f, data.nu, data.big_f);
    out.stress = std::move(t.field);
    out.max_jump = t.max_jump;
    return out;
}

struct ElasticitySolution {
    CRField u;
    CRField lift;
    CRField r;
    RTField sigma;
    ElasticityTensor c{1.0, 1.0};
    VectorP0 f;
    std::vector<Vec2> traction;
    double max_jump = 0.0;
    LinearSolveReport report;

    CRField total() const { return u + lift; }
};

inline ElasticitySolution solve_and_reconstruct_elasticity(const Triangulation& mesh, const ElasticityData& data)
{
    ElasticityDiscreteSolution d = solve_elasticity(mesh, data);
    ElasticitySolution out;
    out.u = std::move(d.u);
    out.lift = data.lift;
    out.c = data.c;
    out.f = data.f;
    out.traction = data.traction;
    out.report = d.report;
    out.r = solve_lifting(mesh, data.c.mu(), out.total(), out.lift).r;
    RTAssembly s = marini_elasticity(mesh, out.u, out.lift, out.r, data.f, data.c, data.big_f);
    out.sigma = std::move(s.field);
    out.max_jump = s.max_jump;
    return out;
}

// ---------------------------------------------------------------- residual checks

/// max_T |div tau + f_h|.
inline double divergence_residual(const Triangulation& mesh, const RTField& tau, const VectorP0& f)
{
    const VectorP0 div = rt_divergence(mesh, tau);
    double r = 0.0;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        r = std::max(r, (div[t] + (f.empty() ? Vec2::Zero() : f[t])).cwiseAbs().maxCoeff());
    }
    return r;
}

// ---------------------------------------------------------------- energies (Stokes)

/// Data of the discrete Stokes energies; the tensor load is taken as zero.
struct StokesEnergyData {
    double nu = 1.0;
    CRField lift;
    VectorP0 f;
    std::vector<Vec2> traction;
};

inline StokesEnergyData energy_data(const StokesSolution& s)
{
    return {s.nu, s.lift, s.f, s.traction};
}

inline constexpr double kAdmissibilityTolerance = 1e-10;

/// Largest violation of div_h v = 0 for a homogeneous CR field v.
inline double primal_admissibility_residual(const Triangulation& mesh, const CRField& v)
{
    const ScalarP0 d = broken_divergence(mesh, v);
    double r = 0.0;
    for (double x : d) {
        r = std::max(r, std::abs(x));
    }
    return r / std::max(1.0, detail::divergence_scale(mesh, v));
}

/// Largest element force imbalance |T| |div tau + f_h| over the largest element
/// force magnitude sum_E |E| |tau_E| + |T| |f_h|. Solver round-off enters the
/// divergence divided by |T|, so the unweighted residual grows like h^-2.
inline double force_balance_residual(const Triangulation& mesh, const RTField& tau, const VectorP0& f)
{
    const VectorP0 div = rt_divergence(mesh, tau);
    double imbalance = 0.0;
    double magnitude = 0.0;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const double area = mesh.element_geometry(t).area;
        const Vec2 ft = f.empty() ? Vec2::Zero() : f[t];
        imbalance = std::max(imbalance, area * (div[t] + ft).cwiseAbs().maxCoeff());
        double local = area * ft.cwiseAbs().maxCoeff();
        for (Index s : mesh.element_sides(t).sides) {
            local += mesh.side_geometry(s).length * tau.flux[s].cwiseAbs().maxCoeff();
        }
        magnitude = std::max(magnitude, local);
    }
    return magnitude > 0.0 ? imbalance / magnitude : 0.0;
}

/// Largest violation of div tau = -f_h (relative force balance) and tau n = g_h on the Neumann part.
inline double dual_admissibility_residual(const Triangulation& mesh, const RTField& tau, const StokesEnergyData& data)
{
    double r = force_balance_residual(mesh, tau, data.f);
    if (!data.traction.empty()) {
        r = std::max(r, rt_neumann_residual(mesh, tau, data.traction) / std::max(1.0, detail::max_flux(tau)));
    }
    return r;
}

/// I_h(v) = nu/2 |grad_h w|^2 - (f_h, Pi_h w) - sum_N |S| g_S . w_S with w = v + lift;
/// +infinity when div_h v != 0.
inline double primal_energy_stokes(const Triangulation& mesh, const CRField& v, const StokesEnergyData& data)
{
    if (primal_admissibility_residual(mesh, v) > kAdmissibilityTolerance) {
        return std::numeric_limits<double>::infinity();
    }
    const CRField w = v + data.lift;
    const TensorP0 g = broken_gradient(mesh, w);
    const VectorP0 avg = cr_cellaverage(mesh, w);
    double e = 0.5 * data.nu * l2_norm_squared(mesh, g);
    if (!data.f.empty()) {
        e -= l2_product(mesh, data.f, avg);
    }
    if (!data.traction.empty()) {
        for (Index s = 0; s < mesh.num_sides(); ++s) {
            if (mesh.is_neumann_side(s)) {
                e -= mesh.side_geometry(s).length * data.traction[s].dot(w[s]);
            }
        }
    }
    return e;
}

/// D_h(tau) = -1/(2 nu) |Pi_h dev tau|^2 + (Pi_h dev tau, grad_h lift) - (f_h, Pi_h lift)
///            - sum_N |S| g_S . lift_S;  -infinity when tau is not admissible.
inline double dual_energy_stokes(const Triangulation& mesh, const RTField& tau, const StokesEnergyData& data)
{
    if (dual_admissibility_residual(mesh, tau, data) > kAdmissibilityTolerance) {
        return -std::numeric_limits<double>::infinity();
    }
    const TensorP0 d = dev(rt_cellaverage(mesh, tau));
    const TensorP0 g = broken_gradient(mesh, data.lift);
    double e = -0.5 / data.nu * l2_norm_squared(mesh, d) + l2_product(mesh, d, g);
    if (!data.f.empty()) {
        e -= l2_product(mesh, data.f, cr_cellaverage(mesh, data.lift));
    }
    if (!data.traction.empty()) {
        for (Index s = 0; s < mesh.num_sides(); ++s) {
            if (mesh.is_neumann_side(s)) {
                e -= mesh.side_geometry(s).length * data.traction[s].dot(data.lift[s]);
            }
        }
    }
    return e;
}

struct Indicators {
    std::vector<double> values;
    double total = 0.0;
};

inline Indicators make_indicators(std::vector<double> values)
{
    Indicators out{std::move(values), 0.0};
    for (double v : out.values) {
        out.total += v;
    }
    return out;
}

/// eta^2_T = nu/2 |grad_h(v + lift) - (1/nu) Pi_h dev tau|^2_T.
inline Indicators gap_indicator_stokes_discrete(const Triangulation& mesh, const CRField& v, const RTField& tau,
                                                const CRField& lift, double nu)
{
    const CRField w = v + lift;
    std::vector<double> eta(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const Mat2 d = broken_gradient(mesh, w, t) - dev(rt_local(mesh, tau, t).value) / nu;
        eta[t] = 0.5 * nu * mesh.element_geometry(t).area * d.squaredNorm();
    }
    return make_indicators(std::move(eta));
}

struct StrongConvexity {
    double rho2_primal = 0.0; ///< nu/2 |grad_h(v - u_h)|^2
    double rho2_dual = 0.0;   ///< 1/(2 nu) |Pi_h dev(tau - T_h)|^2
    double total() const { return rho2_primal + rho2_dual; }
};

inline StrongConvexity strong_convexity_stokes(const Triangulation& mesh, const CRField& v, const RTField& tau,
                                               const StokesSolution& sol)
{
    StrongConvexity out;
    out.rho2_primal = 0.5 * sol.nu * l2_norm_squared(mesh, broken_gradient(mesh, v - sol.u));
    out.rho2_dual = 0.5 / sol.nu * l2_norm_squared(mesh, dev(rt_cellaverage(mesh, tau - sol.stress)));
    return out;
}

// ---------------------------------------------------------------- random admissible perturbations

/// Uniform[-1,1] CR coefficients, zeroed on Dirichlet sides and projected onto
/// the discretely divergence-free fields.
inline CRField random_divfree_cr(const Triangulation& mesh, const StokesSolver& solver, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    CRField v(mesh.num_sides());
    for (auto& x : v.values) {
        x.x() = dist(rng);
        x.y() = dist(rng);
    }
    return solver.project_divfree(v);
}

inline CRField random_divfree_cr(const Triangulation& mesh, std::uint64_t seed)
{
    return random_divfree_cr(mesh, StokesSolver(mesh, 1.0), seed);
}

/// RT field whose row i is rot phi_i = (d2 phi_i, -d1 phi_i) for a conforming
/// P1 potential phi_i. The normal flux on a side is the tangential derivative.
inline RTField rot_field(const Triangulation& mesh, const std::vector<Vec2>& potential)
{
    RTField out(mesh.num_sides());
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        const Side& side = mesh.side(s);
        out.flux[s] = (potential[side.vertices[1]] - potential[side.vertices[0]]) / mesh.side_geometry(s).length;
    }
    return out;
}

/// Divergence-free RT field with zero normal trace on the Neumann part:
/// rotated gradients of uniform[-1,1] P1 potentials vanishing at Neumann vertices.
inline RTField random_divfree_rt(const Triangulation& mesh, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Vec2> phi(mesh.num_vertices());
    const auto& neumann = mesh.neumann_vertex_mask();
    for (Index i = 0; i < mesh.num_vertices(); ++i) {
        phi[i] = Vec2(dist(rng), dist(rng));
        if (neumann[i]) {
            phi[i].setZero();
        }
    }
    return rot_field(mesh, phi);
}

// ---------------------------------------------------------------- elasticity quantities

/// 1/2 |C^{1/2}(eps(w) - C^{-1} sigma)|^2_T for the conforming total displacement w.
inline Indicators gap_indicator_elasticity(const Triangulation& mesh, const P1Field& w, const RTField& sigma,
                                           const ElasticityTensor& c)
{
    const TriangleRule rule = triangle_rule_degree2();
    std::vector<double> eta(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const Mat2 eps = sym(p1_gradient(mesh, w, t));
        const RTLocal loc = rt_local(mesh, sigma, t);
        const Point2 xt = mesh.element_geometry(t).centroid;
        eta[t] = 0.5 * integrate_element(mesh, t, rule, [&](const Point2& x) {
            return c.energy_norm_squared(eps - c.apply_inverse(loc.at(x, xt)));
        });
    }
    return make_indicators(std::move(eta));
}

/// nu/2 |grad w - (1/nu) dev tau|^2_T for the conforming total velocity w.
inline Indicators gap_indicator_stokes(const Triangulation& mesh, const P1Field& w, const RTField& tau, double nu)
{
    const TriangleRule rule = triangle_rule_degree2();
    std::vector<double> eta(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const Mat2 g = p1_gradient(mesh, w, t);
        const RTLocal loc = rt_local(mesh, tau, t);
        const Point2 xt = mesh.element_geometry(t).centroid;
        eta[t] = 0.5 * nu * integrate_element(mesh, t, rule, [&](const Point2& x) {
            return (g - dev(loc.at(x, xt)) / nu).squaredNorm();
        });
    }
    return make_indicators(std::move(eta));
}

/// (h_T^2 / pi^2) |f - f_h|^2_T + |F - F_h|^2_T; null callables mean zero data.
inline Indicators oscillation_indicator(const Triangulation& mesh, const std::function<Vec2(const Point2&)>& f,
                                        const VectorP0& f_h, const std::function<Mat2(const Point2&)>& big_f,
                                        const TensorP0& big_f_h)
{
    const TriangleRule rule = triangle_rule(kDataDegree);
    std::vector<double> osc(mesh.num_elements(), 0.0);
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const double h = mesh.element_geometry(t).diameter;
        if (f) {
            const Vec2 fh = f_h.empty() ? Vec2::Zero() : f_h[t];
            osc[t] += h * h / (std::numbers::pi * std::numbers::pi) *
                      integrate_element(mesh, t, rule, [&](const Point2& x) { return (f(x) - fh).squaredNorm(); });
        }
        if (big_f) {
            const Mat2 fh = big_f_h.empty() ? Mat2::Zero() : big_f_h[t];
            osc[t] += integrate_element(mesh, t, rule, [&](const Point2& x) { return (big_f(x) - fh).squaredNorm(); });
        }
    }
    return make_indicators(std::move(osc));
}

} // namespace crdual
