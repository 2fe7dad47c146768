#pragma once

#include <crdual/duality.hpp>
#include <crdual/elasticity_tensor.hpp>
#include <crdual/forms.hpp>
#include <crdual/mesh.hpp>
#include <crdual/spaces.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace crdual {

enum class ProblemKind { Stokes, Elasticity };

using ScalarFunction = std::function<double(const Point2&)>;
using VectorFunction = std::function<Vec2(const Point2&)>;
using TensorFunction = std::function<Mat2(const Point2&)>;
/// Neumann traction as a function of position and outward unit normal.
using TractionFunction = std::function<Vec2(const Point2&, const Vec2&)>;

struct ExactSolution {
    VectorFunction u;
    TensorFunction grad_u;
    ScalarFunction p;      ///< Stokes only
    TensorFunction stress; ///< nu grad u - p I, or C eps(u)
};

struct ProblemSpec {
    std::string name;
    ProblemKind kind = ProblemKind::Stokes;
    std::function<Triangulation()> initial_mesh;
    Labeler labeler;
    double nu = 1.0;
    std::optional<ElasticityTensor> material;
    VectorFunction f;           ///< null means zero
    TensorFunction big_f;       ///< null means zero
    TractionFunction traction;  ///< null means zero
    VectorFunction dirichlet;   ///< Dirichlet data, extended to a lift on all of the domain
    std::optional<Point2> singular_point;
    std::optional<ExactSolution> exact;
};

namespace detail {

inline bool near(double a, double b)
{
    return std::abs(a - b) <= 1e-12;
}

} // namespace detail

// ---------------------------------------------------------------- Taylor-Green

inline Vec2 taylor_green_u(const Point2& x)
{
    using std::numbers::pi;
    return {std::sin(pi * x.x()) * std::cos(pi * x.y()), -std::cos(pi * x.x()) * std::sin(pi * x.y())};
}

inline Mat2 taylor_green_grad_u(const Point2& x)
{
    using std::numbers::pi;
    const double sx = std::sin(pi * x.x());
    const double cx = std::cos(pi * x.x());
    const double sy = std::sin(pi * x.y());
    const double cy = std::cos(pi * x.y());
    Mat2 g;
    g << pi * cx * cy, -pi * sx * sy, pi * sx * sy, -pi * cx * cy;
    return g;
}

inline double taylor_green_p(const Point2& x)
{
    using std::numbers::pi;
    return 0.25 * (std::cos(2.0 * pi * x.x()) + std::sin(2.0 * pi * x.y()));
}

/// Unit square, viscosity 1/2, Dirichlet on x in {0,1}, exact traction on y in {0,1}.
inline ProblemSpec taylor_green_stokes()
{
    using std::numbers::pi;
    const double nu = 0.5;
    ProblemSpec p;
    p.name = "taylor-green";
    p.kind = ProblemKind::Stokes;
    p.nu = nu;
    p.labeler = [](const Point2& m) {
        return (detail::near(m.x(), 0.0) || detail::near(m.x(), 1.0)) ? BoundaryLabel::Dirichlet
                                                                      : BoundaryLabel::Neumann;
    };
    p.initial_mesh = [labeler = p.labeler] { return structured_square_mesh(10, labeler); };
    p.f = [nu](const Point2& x) {
        const Vec2 grad_p(-0.5 * pi * std::sin(2.0 * pi * x.x()), 0.5 * pi * std::cos(2.0 * pi * x.y()));
        return Vec2(2.0 * nu * pi * pi * taylor_green_u(x) + grad_p);
    };
    const auto stress = [nu](const Point2& x) {
        return Mat2(nu * taylor_green_grad_u(x) - taylor_green_p(x) * Mat2::Identity());
    };
    p.traction = [stress](const Point2& x, const Vec2& n) { return Vec2(stress(x) * n); };
    p.dirichlet = taylor_green_u;
    p.exact = ExactSolution{taylor_green_u, taylor_green_grad_u, taylor_green_p, stress};
    return p;
}

// ---------------------------------------------------------------- L-shape

/// Singular Stokes solution on the L-shaped domain with the re-entrant corner at the origin.
struct LShapeSolution {
    static constexpr double alpha = 856399.0 / 1572864.0;
    static constexpr double omega = 3.0 * std::numbers::pi / 2.0;

    /// n-th derivative of psi.
    static double psi(double theta, int n = 0)
    {
        const double a = alpha;
        const double cw = std::cos(omega * a);
        // psi = cw sin((a+1)t)/(a+1) - cos((a+1)t) + cw sin((a-1)t)/(1-a) + cos((a-1)t)
        const auto term = [theta, n](double k, double sin_coef, double cos_coef) {
            const double kn = std::pow(k, n);
            const double shift = n * std::numbers::pi / 2.0;
            return kn * (sin_coef * std::sin(k * theta + shift) + cos_coef * std::cos(k * theta + shift));
        };
        return term(a + 1.0, cw / (a + 1.0), -1.0) + term(a - 1.0, cw / (1.0 - a), 1.0);
    }

    static double angle(const Point2& x)
    {
        double t = std::atan2(x.y(), x.x());
        if (t < 0.0) {
            t += 2.0 * std::numbers::pi;
        }
        return t;
    }

    /// Angular profile U(theta) with u = r^alpha U(theta), and its derivative.
    static Vec2 profile(double t, int n)
    {
        const double a = alpha;
        const double s = std::sin(t);
        const double c = std::cos(t);
        if (n == 0) {
            return {(1.0 + a) * s * psi(t) + c * psi(t, 1), -(1.0 + a) * c * psi(t) + s * psi(t, 1)};
        }
        return {(1.0 + a) * (c * psi(t) + s * psi(t, 1)) - s * psi(t, 1) + c * psi(t, 2),
                (1.0 + a) * (s * psi(t) - c * psi(t, 1)) + c * psi(t, 1) + s * psi(t, 2)};
    }

    static Vec2 u(const Point2& x)
    {
        const double r = x.norm();
        if (r == 0.0) {
            return Vec2::Zero();
        }
        return std::pow(r, alpha) * profile(angle(x), 0);
    }

    static Mat2 grad_u(const Point2& x)
    {
        const double r = x.norm();
        if (r == 0.0) {
            return Mat2::Zero();
        }
        const double t = angle(x);
        const Vec2 dr = alpha * std::pow(r, alpha - 1.0) * profile(t, 0);
        const Vec2 dt_over_r = std::pow(r, alpha - 1.0) * profile(t, 1);
        const double s = std::sin(t);
        const double c = std::cos(t);
        Mat2 g;
        g.col(0) = dr * c - dt_over_r * s;
        g.col(1) = dr * s + dt_over_r * c;
        return g;
    }

    static double p(const Point2& x)
    {
        const double r = x.norm();
        if (r == 0.0) {
            return 0.0;
        }
        const double t = angle(x);
        const double a = alpha;
        return std::pow(r, a - 1.0) * ((1.0 + a) * (1.0 + a) * psi(t, 1) + psi(t, 3)) / (a - 1.0);
    }
};

/// (-1,1)^2 minus [0,1]x[-1,0] from three 4x4 blocks, unit viscosity, zero load.
inline ProblemSpec lshape_stokes()
{
    ProblemSpec p;
    p.name = "lshape";
    p.kind = ProblemKind::Stokes;
    p.nu = 1.0;
    p.labeler = [](const Point2&) { return BoundaryLabel::Dirichlet; };
    p.initial_mesh = [labeler = p.labeler] { return lshape_mesh(4, labeler); };
    p.dirichlet = LShapeSolution::u;
    p.singular_point = Point2::Zero();
    const double nu = p.nu;
    const auto stress = [nu](const Point2& x) {
        return Mat2(nu * LShapeSolution::grad_u(x) - LShapeSolution::p(x) * Mat2::Identity());
    };
    p.exact = ExactSolution{LShapeSolution::u, LShapeSolution::grad_u, LShapeSolution::p, stress};
    return p;
}

// ---------------------------------------------------------------- Cook's membrane

inline Point2 cook_map(double xi, double eta)
{
    const Point2 p0(0.0, 0.0);
    const Point2 p1(0.48, 0.44);
    const Point2 p2(0.48, 0.60);
    const Point2 p3(0.0, 0.44);
    return (1.0 - xi) * (1.0 - eta) * p0 + xi * (1.0 - eta) * p1 + xi * eta * p2 + (1.0 - xi) * eta * p3;
}

/// Tapered panel clamped at x = 0 with a vertical shear load on x = 0.48.
inline ProblemSpec cook_membrane()
{
    const double shear = 0.01;
    ProblemSpec p;
    p.name = "cook";
    p.kind = ProblemKind::Elasticity;
    p.material = ElasticityTensor(1.0, 5.0);
    p.labeler = [](const Point2& m) {
        return detail::near(m.x(), 0.0) ? BoundaryLabel::Dirichlet : BoundaryLabel::Neumann;
    };
    // 5x3 mapped grid bisected once: 120 elements in the pattern that uniform
    // refinement reproduces.
    p.initial_mesh = [labeler = p.labeler] {
        return refine_uniform(structured_mapped_mesh(5, 3, cook_map, labeler)).mesh;
    };
    p.traction = [shear](const Point2& x, const Vec2&) {
        return detail::near(x.x(), 0.48) ? Vec2(0.0, shear) : Vec2(Vec2::Zero());
    };
    p.dirichlet = [](const Point2&) { return Vec2(Vec2::Zero()); };
    return p;
}

// ---------------------------------------------------------------- smooth elasticity

/// u = x(1-x)y(1-y) (1, 1/2) on the unit square, clamped everywhere, mu = 1, lambda = 5.
inline ProblemSpec elasticity_manufactured()
{
    const ElasticityTensor c(1.0, 5.0);
    const Vec2 a(1.0, 0.5);
    ProblemSpec p;
    p.name = "elasticity-mms";
    p.kind = ProblemKind::Elasticity;
    p.material = c;
    p.labeler = [](const Point2&) { return BoundaryLabel::Dirichlet; };
    p.initial_mesh = [labeler = p.labeler] { return structured_square_mesh(4, labeler); };
    const auto u = [a](const Point2& x) {
        return Vec2(x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y()) * a);
    };
    const auto grad = [a](const Point2& x) {
        const Vec2 gphi((1.0 - 2.0 * x.x()) * x.y() * (1.0 - x.y()), x.x() * (1.0 - x.x()) * (1.0 - 2.0 * x.y()));
        return Mat2(outer(a, gphi));
    };
    p.f = [a, c](const Point2& x) {
        const double pxx = -2.0 * x.y() * (1.0 - x.y());
        const double pyy = -2.0 * x.x() * (1.0 - x.x());
        const double pxy = (1.0 - 2.0 * x.x()) * (1.0 - 2.0 * x.y());
        Mat2 hess;
        hess << pxx, pxy, pxy, pyy;
        return Vec2(-(c.mu() * (pxx + pyy) * a + (c.mu() + c.lambda()) * hess * a));
    };
    p.dirichlet = [](const Point2&) { return Vec2(Vec2::Zero()); };
    const auto stress = [grad, c](const Point2& x) { return Mat2(c.apply(sym(grad(x)))); };
    p.exact = ExactSolution{u, grad, nullptr, stress};
    return p;
}

inline std::optional<ProblemSpec> problem_by_name(const std::string& name)
{
    if (name == "taylor-green") {
        return taylor_green_stokes();
    }
    if (name == "lshape") {
        return lshape_stokes();
    }
    if (name == "cook") {
        return cook_membrane();
    }
    if (name == "elasticity-mms") {
        return elasticity_manufactured();
    }
    return std::nullopt;
}

inline std::vector<std::string> problem_names()
{
    return {"taylor-green", "lshape", "cook", "elasticity-mms"};
}

// ---------------------------------------------------------------- discrete data

struct DiscreteData {
    CRField lift;
    VectorP0 f;
    std::vector<Vec2> traction;
};

inline DiscreteData discretize_data(const ProblemSpec& problem, const Triangulation& mesh)
{
    DiscreteData d;
    d.lift = problem.dirichlet ? cr_interpolate(mesh, problem.dirichlet, kDataSidePoints, problem.singular_point)
                               : CRField::zero(mesh);
    d.f = problem.f ? pi0(mesh, problem.f, kDataDegree) : VectorP0(mesh.num_elements(), Vec2::Zero());
    d.traction.assign(mesh.num_sides(), Vec2::Zero());
    if (problem.traction) {
        for (Index s = 0; s < mesh.num_sides(); ++s) {
            if (mesh.is_neumann_side(s)) {
                const Vec2 n = mesh.side(s).normal;
                d.traction[s] = pi_side(mesh, [&](const Point2& x) { return Vec2(problem.traction(x, n)); }, s);
            }
        }
    }
    return d;
}

inline StokesData stokes_data(const ProblemSpec& problem, const Triangulation& mesh)
{
    if (problem.kind != ProblemKind::Stokes) {
        throw Error("stokes_data: not a Stokes problem");
    }
    DiscreteData d = discretize_data(problem, mesh);
    StokesData out;
    out.nu = problem.nu;
    out.lift = std::move(d.lift);
    out.f = std::move(d.f);
    out.traction = std::move(d.traction);
    if (problem.big_f) {
        out.big_f = pi0(mesh, problem.big_f, kDataDegree);
    }
    return out;
}

inline ElasticityData elasticity_data(const ProblemSpec& problem, const Triangulation& mesh)
{
    if (problem.kind != ProblemKind::Elasticity || !problem.material) {
        throw Error("elasticity_data: not an elasticity problem");
    }
    DiscreteData d = discretize_data(problem, mesh);
    ElasticityData out;
    out.c = *problem.material;
    out.lift = std::move(d.lift);
    out.f = std::move(d.f);
    out.traction = std::move(d.traction);
    if (problem.big_f) {
        out.big_f = pi0(mesh, problem.big_f, kDataDegree);
    }
    return out;
}

/// Conforming total field: nodal average of u_total with the exact data at Dirichlet vertices.
inline P1Field conforming_total(const ProblemSpec& problem, const Triangulation& mesh, const CRField& total)
{
    const VectorFunction g = problem.dirichlet ? problem.dirichlet : VectorFunction([](const Point2&) {
        return Vec2(Vec2::Zero());
    });
    return nodal_average(mesh, total, dirichlet_vertex_values(mesh, g));
}

// ---------------------------------------------------------------- exact errors

namespace detail {

/// Element integral that grades toward the problem's singular point when t touches it.
template <class F>
auto exact_integral(const ProblemSpec& problem, const Triangulation& mesh, Index t, const TriangleRule& rule, F&& f)
{
    if (problem.singular_point) {
        for (int k = 0; k < 3; ++k) {
            if ((mesh.element_vertex(t, k) - *problem.singular_point).norm() <= 1e-12) {
                return integrate_element_graded(mesh, t, rule, f, k);
            }
        }
    }
    return integrate_element(mesh, t, rule, f);
}

} // namespace detail

struct StokesErrors {
    double primal2 = 0.0;           ///< nu/2 |grad u - grad_h(u_h + lift)|^2
    double dual2 = 0.0;             ///< 1/(2 nu) |T - T_h|^2 with the affine T_h
    double dual2_dev_average = 0.0; ///< 1/(2 nu) |dev T - Pi_h dev T_h|^2
};

inline StokesErrors exact_errors_stokes(const ProblemSpec& problem, const Triangulation& mesh,
                                        const StokesSolution& sol)
{
    if (!problem.exact) {
        throw Error("exact_errors: problem has no exact solution");
    }
    const ExactSolution& ex = *problem.exact;
    const TriangleRule rule = triangle_rule(kDataDegree);
    const CRField total = sol.total();
    const double nu = sol.nu;
    StokesErrors out;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const Mat2 g = broken_gradient(mesh, total, t);
        const RTLocal loc = rt_local(mesh, sol.stress, t);
        const Point2 xt = mesh.element_geometry(t).centroid;
        const Mat2 avg = dev(loc.value);
        const Eigen::Vector3d sums = detail::exact_integral(problem, mesh, t, rule, [&](const Point2& x) {
            const Mat2 st = ex.stress(x);
            return Eigen::Vector3d((ex.grad_u(x) - g).squaredNorm(), (st - loc.at(x, xt)).squaredNorm(),
                                   (dev(st) - avg).squaredNorm());
        });
        out.primal2 += sums(0);
        out.dual2 += sums(1);
        out.dual2_dev_average += sums(2);
    }
    out.primal2 *= 0.5 * nu;
    out.dual2 *= 0.5 / nu;
    out.dual2_dev_average *= 0.5 / nu;
    return out;
}

struct ElasticityErrors {
    double primal2 = 0.0; ///< 1/2 |C^{1/2} eps(w - u)|^2, w conforming
    double dual2 = 0.0;   ///< 1/2 |C^{-1/2}(sigma*_h - sigma)|^2
};

inline ElasticityErrors exact_errors_elasticity(const ProblemSpec& problem, const Triangulation& mesh,
                                                const P1Field& w, const RTField& sigma)
{
    if (!problem.exact || !problem.material) {
        throw Error("exact_errors: problem has no exact solution");
    }
    const ExactSolution& ex = *problem.exact;
    const ElasticityTensor& c = *problem.material;
    const TriangleRule rule = triangle_rule(kDataDegree);
    ElasticityErrors out;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const Mat2 eps = sym(p1_gradient(mesh, w, t));
        const RTLocal loc = rt_local(mesh, sigma, t);
        const Point2 xt = mesh.element_geometry(t).centroid;
        const Eigen::Vector2d sums = detail::exact_integral(problem, mesh, t, rule, [&](const Point2& x) {
            return Eigen::Vector2d(c.energy_norm_squared(eps - sym(ex.grad_u(x))),
                                   c.compliance_norm_squared(loc.at(x, xt) - ex.stress(x)));
        });
        out.primal2 += 0.5 * sums(0);
        out.dual2 += 0.5 * sums(1);
    }
    return out;
}

// ---------------------------------------------------------------- a priori identity

struct AprioriIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double relative_error() const { return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300); }
};

/// Both sides of the a priori identity for a Stokes problem with exact solution
/// and zero tensor load:
///   nu/2 |grad_h(I_cr u - u_total)|^2 + 1/(2 nu) |Pi dev I_rt T - Pi dev T_h|^2
///     = 1/(2 nu) |Pi dev T - Pi dev I_rt T|^2.
inline AprioriIdentity apriori_identity_check_stokes(const ProblemSpec& problem, const Triangulation& mesh,
                                                     const StokesSolution& sol)
{
    if (!problem.exact) {
        throw Error("apriori_identity_check_stokes: problem has no exact solution");
    }
    const ExactSolution& ex = *problem.exact;
    const double nu = sol.nu;
    const CRField icr = cr_interpolate(mesh, ex.u, kDataSidePoints, problem.singular_point);
    const RTField irt = rt_interpolate(mesh, ex.stress);
    const TensorP0 pi_dev_t = pi0(mesh, [&](const Point2& x) { return Mat2(dev(ex.stress(x))); }, kDataDegree);
    const TensorP0 pi_dev_irt = dev(rt_cellaverage(mesh, irt));
    const TensorP0 pi_dev_th = dev(rt_cellaverage(mesh, sol.stress));
    AprioriIdentity out;
    out.lhs = 0.5 * nu * l2_norm_squared(mesh, broken_gradient(mesh, icr - sol.total())) +
              0.5 / nu * l2_norm_squared(mesh, pi_dev_irt - pi_dev_th);
    out.rhs = 0.5 / nu * l2_norm_squared(mesh, pi_dev_t - pi_dev_irt);
    return out;
}

// ---------------------------------------------------------------- discrete Prager-Synge identity

struct IdentityRow {
    int level = 0;
    int sample = 0;
    Index num_dof = 0;
    double err_primal2 = 0.0; ///< exact errors of the discrete solution on this level
    double err_dual2 = 0.0;
    double rho2_primal = 0.0;
    double rho2_dual = 0.0;
    double gap = 0.0;
    double relative_error = 0.0;
    bool admissible = true;
};

struct IdentityOptions {
    int levels = 6;
    int seeds = 3;
    std::uint64_t seed = 1;
    bool tamper = false;
};

/// Random admissible pairs (u_h + a v, T_h + b tau) on successive uniform
/// refinements; compares the gap estimator with rho^2_I + rho^2_{-D}.
inline std::vector<IdentityRow> verify_identity(const ProblemSpec& problem, const IdentityOptions& opt,
                                                const std::function<void(const IdentityRow&)>& on_row = {})
{
    if (problem.kind != ProblemKind::Stokes) {
        throw Error("verify_identity: requires a Stokes problem");
    }
    if (!problem.exact) {
        throw Error("verify_identity: requires an exact solution to scale perturbations");
    }
    if (opt.levels < 1 || opt.seeds < 1) {
        throw Error("verify_identity: levels and seeds must be positive");
    }
    std::vector<IdentityRow> rows;
    Triangulation mesh = problem.initial_mesh();
    for (int level = 1; level <= opt.levels; ++level) {
        if (level > 1) {
            mesh = refine_uniform(mesh).mesh;
        }
        const StokesData data = stokes_data(problem, mesh);
        const StokesSolver solver(mesh, data.nu);
        const StokesSolution sol = solve_and_reconstruct_stokes(mesh, data, &solver);
        const StokesErrors err = exact_errors_stokes(problem, mesh, sol);
        const StokesEnergyData edata = energy_data(sol);
        for (int sample = 0; sample < opt.seeds; ++sample) {
            const std::uint64_t seed = opt.seed * 1000003ULL + static_cast<std::uint64_t>(level) * 101ULL +
                                       static_cast<std::uint64_t>(sample);
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> factor(0.5, 2.0);
            const CRField w = random_divfree_cr(mesh, solver, seed);
            const RTField delta = random_divfree_rt(mesh, seed);
            const double w2 = 0.5 * data.nu * l2_norm_squared(mesh, broken_gradient(mesh, w));
            const double d2 = 0.5 / data.nu * l2_norm_squared(mesh, dev(rt_cellaverage(mesh, delta)));
            const double a = std::sqrt(err.primal2 * factor(rng) / w2);
            const double b = std::sqrt(err.dual2_dev_average * factor(rng) / d2);
            const CRField v = sol.u + a * w;
            RTField tau = sol.stress + b * delta;
            if (opt.tamper) {
                Mat2 c;
                c << 1.0, 0.5, -0.25, -0.75;
                c *= std::sqrt(err.dual2_dev_average);
                for (Index s = 0; s < mesh.num_sides(); ++s) {
                    tau.flux[s] += c * mesh.side(s).normal;
                }
            }
            const StrongConvexity rho = strong_convexity_stokes(mesh, v, tau, sol);
            IdentityRow row;
            row.level = level;
            row.sample = sample;
            row.num_dof = stokes_num_dof(mesh);
            row.err_primal2 = err.primal2;
            row.err_dual2 = err.dual2;
            row.rho2_primal = rho.rho2_primal;
            row.rho2_dual = rho.rho2_dual;
            row.gap = gap_indicator_stokes_discrete(mesh, v, tau, sol.lift, sol.nu).total;
            row.relative_error = std::abs(row.gap - rho.total()) / rho.total();
            row.admissible = primal_admissibility_residual(mesh, v) <= kAdmissibilityTolerance &&
                             dual_admissibility_residual(mesh, tau, edata) <= kAdmissibilityTolerance;
            rows.push_back(row);
            if (on_row) {
                on_row(row);
            }
        }
    }
    return rows;
}

} // namespace crdual
