#include "test_support.hpp"

#include <crdual/duality.hpp>
#include <crdual/problems.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace crdual;
using crdual::testing::all_dirichlet;
using crdual::testing::mixed_square_labels;
using crdual::testing::random_vector;

namespace {

Triangulation refined(Triangulation mesh, int times)
{
    for (int i = 0; i < times; ++i) {
        mesh = refine_uniform(mesh).mesh;
    }
    return mesh;
}

struct StokesCase {
    ProblemSpec problem;
    Triangulation mesh;
    StokesData data;
    StokesSolution sol;
};

StokesCase solve_case(ProblemSpec problem, int refinements)
{
    StokesCase c{std::move(problem), {}, {}, {}};
    c.mesh = refined(c.problem.initial_mesh(), refinements);
    c.data = stokes_data(c.problem, c.mesh);
    c.sol = solve_and_reconstruct_stokes(c.mesh, c.data);
    return c;
}

/// sum_T |T| Pi_h tau_T : grad_h phi over all CR basis functions phi.
Vector stress_against_gradients(const Triangulation& mesh, const RTField& tau)
{
    Vector out = Vector::Zero(2 * mesh.num_sides());
    const TensorP0 avg = rt_cellaverage(mesh, tau);
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const auto& es = mesh.element_sides(t);
        for (int k = 0; k < 3; ++k) {
            const Vec2 v = mesh.element_geometry(t).area * avg[t] * cr_shape_gradient(mesh, t, k);
            out(2 * es.sides[k]) += v.x();
            out(2 * es.sides[k] + 1) += v.y();
        }
    }
    return out;
}

/// Largest normal-component mismatch of broken affine tensors across interior
/// sides, checked at both side endpoints.
template <class Eval>
double endpoint_jump(const Triangulation& mesh, Eval&& eval)
{
    double m = 0.0;
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        const Side& side = mesh.side(s);
        if (side.is_boundary()) {
            continue;
        }
        for (Index v : side.vertices) {
            const Point2 x = mesh.vertex(v);
            const Vec2 a = eval(side.elements[0], x) * side.normal;
            const Vec2 b = eval(side.elements[1], x) * side.normal;
            m = std::max(m, (a - b).cwiseAbs().maxCoeff());
        }
    }
    return m;
}

} // namespace

TEST(MariniStokes, ContractsOnTaylorGreen)
{
    for (int level = 0; level < 2; ++level) {
        const StokesCase c = solve_case(taylor_green_stokes(), level);
        EXPECT_LT(divergence_residual(c.mesh, c.sol.stress, c.data.f), 1e-10);
        EXPECT_LT(c.sol.max_jump, 1e-10);
        EXPECT_LT(endpoint_jump(c.mesh, [&](Index t, const Point2& x) { return rt_eval(c.mesh, c.sol.stress, t, x); }),
                  1e-10);
        EXPECT_LT(rt_neumann_residual(c.mesh, c.sol.stress, c.data.traction), 1e-10);
        // Pi_h T_h = nu grad_h u_total - p_h I, and its deviator is nu grad_h u_total.
        const TensorP0 avg = rt_cellaverage(c.mesh, c.sol.stress);
        const CRField total = c.sol.total();
        for (Index t = 0; t < c.mesh.num_elements(); ++t) {
            const Mat2 g = broken_gradient(c.mesh, total, t);
            EXPECT_LT((avg[t] - (c.sol.nu * g - c.sol.p[t] * Mat2::Identity())).norm(), 1e-10);
            EXPECT_LT((dev(avg[t]) - c.sol.nu * g).norm(), 1e-10);
        }
    }
}

// (Pi_h T_h, grad_h phi) = (f_h, Pi_h phi) + <g_h, phi>_N for every free CR basis function.
TEST(MariniStokes, DiscreteEquilibrium)
{
    const StokesCase c = solve_case(taylor_green_stokes(), 1);
    const CRDofMap map = cr_dof_map(c.mesh);
    const Vector lhs = restrict_vector(map, stress_against_gradients(c.mesh, c.sol.stress));
    const Vector rhs = restrict_vector(map, load_vector(c.mesh, c.data.f, {}, c.data.traction));
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
}

TEST(MariniStokes, InverseRoundTrip)
{
    const StokesCase c = solve_case(taylor_green_stokes(), 1);
    const CRField back =
        marini_stokes_inverse(c.mesh, c.sol.stress, cr_cellaverage(c.mesh, c.sol.u), c.sol.lift, c.sol.nu);
    for (Index s = 0; s < c.mesh.num_sides(); ++s) {
        EXPECT_LT((back[s] - c.sol.u[s]).norm(), 1e-10);
    }
}

TEST(MariniStokes, InverseRejectsNonConformingStress)
{
    const StokesCase c = solve_case(taylor_green_stokes(), 0);
    const RTField tau = random_divfree_rt(c.mesh, 4) + c.sol.stress;
    EXPECT_THROW(marini_stokes_inverse(c.mesh, tau, cr_cellaverage(c.mesh, c.sol.u), c.sol.lift, c.sol.nu),
                 AdmissibilityError);
}

TEST(Energies, DiscreteStrongDuality)
{
    for (const auto& problem : {taylor_green_stokes(), lshape_stokes()}) {
        const StokesCase c = solve_case(problem, 0);
        const StokesEnergyData e = energy_data(c.sol);
        const double primal = primal_energy_stokes(c.mesh, c.sol.u, e);
        const double dual = dual_energy_stokes(c.mesh, c.sol.stress, e);
        EXPECT_NEAR(primal, dual, 1e-10 * std::max(1.0, std::abs(primal))) << problem.name;
    }
}

TEST(Energies, InadmissibleArgumentsGiveInfinities)
{
    const StokesCase c = solve_case(taylor_green_stokes(), 0);
    const StokesEnergyData e = energy_data(c.sol);
    CRField v = c.sol.u;
    // A free side that is interior, so the perturbation changes two divergences.
    for (Index s = 0; s < c.mesh.num_sides(); ++s) {
        if (!c.mesh.side(s).is_boundary()) {
            v[s] += Vec2(1.0, 1.0);
            break;
        }
    }
    EXPECT_EQ(primal_energy_stokes(c.mesh, v, e), std::numeric_limits<double>::infinity());
    RTField tau = c.sol.stress;
    tau.flux[0] += Vec2(1.0, 0.0);
    EXPECT_EQ(dual_energy_stokes(c.mesh, tau, e), -std::numeric_limits<double>::infinity());
}

TEST(Admissibility, ForceBalanceIsScaleInvariantAndStaysSmallUnderRefinement)
{
    for (int level = 0; level < 4; ++level) {
        const StokesCase c = solve_case(taylor_green_stokes(), level);
        const double r = force_balance_residual(c.mesh, c.sol.stress, c.data.f);
        EXPECT_LT(r, 1e-13) << "level " << level;
        VectorP0 f = c.data.f;
        for (Vec2& x : f) {
            x *= 1e6;
        }
        EXPECT_NEAR(force_balance_residual(c.mesh, 1e6 * c.sol.stress, f), r, 1e-13);
    }
    const Triangulation mesh = structured_square_mesh(2, all_dirichlet());
    const VectorP0 f(mesh.num_elements(), Vec2(1.0, 0.0));
    RTField zero;
    zero.flux.assign(mesh.num_sides(), Vec2::Zero());
    EXPECT_DOUBLE_EQ(force_balance_residual(mesh, zero, f), 1.0);
    EXPECT_EQ(force_balance_residual(mesh, zero, {}), 0.0);
}

TEST(Energies, MinimizerAndMaximizer)
{
    const StokesCase c = solve_case(taylor_green_stokes(), 0);
    const StokesEnergyData e = energy_data(c.sol);
    const StokesSolver solver(c.mesh, c.sol.nu);
    const double primal = primal_energy_stokes(c.mesh, c.sol.u, e);
    const double dual = dual_energy_stokes(c.mesh, c.sol.stress, e);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const CRField w = random_divfree_cr(c.mesh, solver, seed);
        EXPECT_GT(primal_energy_stokes(c.mesh, c.sol.u + 0.1 * w, e), primal);
        const RTField d = random_divfree_rt(c.mesh, seed);
        EXPECT_LT(dual_energy_stokes(c.mesh, c.sol.stress + 0.1 * d, e), dual);
    }
}

class GapIdentity : public ::testing::TestWithParam<double> {};

// For admissible (v, tau): gap(v, tau) = I_h(v) - D_h(tau) = rho^2_primal + rho^2_dual,
// for any viscosity.
TEST_P(GapIdentity, HoldsForRandomAdmissiblePairs)
{
    ProblemSpec problem = taylor_green_stokes();
    problem.nu = GetParam();
    const StokesCase c = solve_case(problem, 1);
    const StokesEnergyData e = energy_data(c.sol);
    const StokesSolver solver(c.mesh, c.sol.nu);
    std::mt19937_64 rng(GetParam() * 1000);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const CRField v = c.sol.u + scale(rng) * random_divfree_cr(c.mesh, solver, seed);
        const RTField tau = c.sol.stress + scale(rng) * random_divfree_rt(c.mesh, seed);
        ASSERT_LE(primal_admissibility_residual(c.mesh, v), kAdmissibilityTolerance);
        ASSERT_LE(dual_admissibility_residual(c.mesh, tau, e), kAdmissibilityTolerance);
        const double gap = gap_indicator_stokes_discrete(c.mesh, v, tau, c.sol.lift, c.sol.nu).total;
        const StrongConvexity rho = strong_convexity_stokes(c.mesh, v, tau, c.sol);
        const double energy_gap = primal_energy_stokes(c.mesh, v, e) - dual_energy_stokes(c.mesh, tau, e);
        EXPECT_NEAR(gap, rho.total(), 1e-10 * rho.total());
        EXPECT_NEAR(gap, energy_gap, 1e-9 * rho.total());
    }
}

INSTANTIATE_TEST_SUITE_P(Viscosity, GapIdentity, ::testing::Values(0.01, 0.5, 1.0, 100.0));

TEST(GapIdentity, VanishesAtDiscreteSolution)
{
    const StokesCase c = solve_case(taylor_green_stokes(), 0);
    const double gap = gap_indicator_stokes_discrete(c.mesh, c.sol.u, c.sol.stress, c.sol.lift, c.sol.nu).total;
    EXPECT_LT(gap, 1e-20);
}

TEST(RandomFields, DivergenceFreeCrAndRt)
{
    const Triangulation mesh = structured_square_mesh(4, mixed_square_labels());
    const CRField v = random_divfree_cr(mesh, 11);
    EXPECT_LT(primal_admissibility_residual(mesh, v), 1e-12);
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        if (mesh.is_dirichlet_side(s)) {
            EXPECT_EQ(v[s].norm(), 0.0);
        }
    }
    const RTField tau = random_divfree_rt(mesh, 11);
    for (const Vec2& d : rt_divergence(mesh, tau)) {
        EXPECT_LT(d.norm(), 1e-12);
    }
    EXPECT_LT(rt_neumann_residual(mesh, tau, std::vector<Vec2>(mesh.num_sides(), Vec2::Zero())), 1e-15);
    EXPECT_LT(rt_from_locals(mesh, rt_locals(mesh, tau)).max_jump, 1e-12);
}

TEST(RandomFields, DeterministicPerSeed)
{
    const Triangulation mesh = structured_square_mesh(3, mixed_square_labels());
    EXPECT_EQ(random_divfree_cr(mesh, 5).values, random_divfree_cr(mesh, 5).values);
    EXPECT_NE(random_divfree_cr(mesh, 5).values, random_divfree_cr(mesh, 6).values);
    EXPECT_EQ(random_divfree_rt(mesh, 5).flux, random_divfree_rt(mesh, 5).flux);
    EXPECT_NE(random_divfree_rt(mesh, 5).flux, random_divfree_rt(mesh, 6).flux);
}

TEST(RandomFields, RotOfAffinePotentialIsConstant)
{
    // phi_i(x) = b_i . x gives row_i = (b_i2, -b_i1).
    const Triangulation mesh = structured_square_mesh(3, all_dirichlet());
    const Mat2 b = (Mat2() << 1.0, 2.0, -0.5, 3.0).finished();
    std::vector<Vec2> phi(mesh.num_vertices());
    for (Index i = 0; i < mesh.num_vertices(); ++i) {
        phi[i] = b * mesh.vertex(i);
    }
    const RTField tau = rot_field(mesh, phi);
    Mat2 expected;
    expected << b(0, 1), -b(0, 0), b(1, 1), -b(1, 0);
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        EXPECT_LT((rt_local(mesh, tau, t).value - expected).norm(), 1e-13);
    }
}

// ---------------------------------------------------------------- elasticity

namespace {

struct ElasticityCase {
    ProblemSpec problem;
    Triangulation mesh;
    ElasticityData data;
    ElasticitySolution sol;
};

ElasticityCase solve_elasticity_case(ProblemSpec problem, int refinements)
{
    ElasticityCase c{std::move(problem), {}, {}, {}};
    c.mesh = refined(c.problem.initial_mesh(), refinements);
    c.data = elasticity_data(c.problem, c.mesh);
    c.sol = solve_and_reconstruct_elasticity(c.mesh, c.data);
    return c;
}

} // namespace

TEST(MariniElasticity, ContractsOnManufacturedAndCook)
{
    for (const auto& problem : {elasticity_manufactured(), cook_membrane()}) {
        const ElasticityCase c = solve_elasticity_case(problem, 1);
        const double scale = std::max(1.0, detail::max_flux(c.sol.sigma));
        EXPECT_LT(divergence_residual(c.mesh, c.sol.sigma, c.data.f), 1e-10 * scale) << problem.name;
        EXPECT_LT(c.sol.max_jump, 1e-10 * scale) << problem.name;
        EXPECT_LT(endpoint_jump(c.mesh, [&](Index t, const Point2& x) { return rt_eval(c.mesh, c.sol.sigma, t, x); }),
                  1e-10 * scale);
        EXPECT_LT(rt_neumann_residual(c.mesh, c.sol.sigma, c.data.traction), 1e-10 * scale) << problem.name;
        // Pi_h sigma = C eps_h(u_total) + grad_h r_h.
        const TensorP0 avg = rt_cellaverage(c.mesh, c.sol.sigma);
        const CRField total = c.sol.total();
        for (Index t = 0; t < c.mesh.num_elements(); ++t) {
            const Mat2 expect = c.sol.c.apply(sym(broken_gradient(c.mesh, total, t))) +
                                broken_gradient(c.mesh, c.sol.r, t);
            EXPECT_LT((avg[t] - expect).norm(), 1e-10 * scale);
        }
        // Equilibrium against every free CR basis function.
        const CRDofMap map = cr_dof_map(c.mesh);
        const Vector lhs = restrict_vector(map, stress_against_gradients(c.mesh, c.sol.sigma));
        const Vector rhs = restrict_vector(map, load_vector(c.mesh, c.data.f, {}, c.data.traction));
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
    }
}

// The symmetric correction -(2/3) sym(f_h (x) (x - x_T)) is not normal-continuous,
// while the row-wise correction -f_h (x) (x - x_T) / 2 is.
TEST(MariniElasticity, SymmetricCorrectionBreaksNormalContinuity)
{
    const ElasticityCase c = solve_elasticity_case(elasticity_manufactured(), 1);
    const CRField total = c.sol.total();
    std::vector<Mat2> base(c.mesh.num_elements());
    for (Index t = 0; t < c.mesh.num_elements(); ++t) {
        base[t] = c.sol.c.apply(sym(broken_gradient(c.mesh, total, t))) + broken_gradient(c.mesh, c.sol.r, t);
    }
    const auto centroid = [&](Index t) { return c.mesh.element_geometry(t).centroid; };
    const double row_wise = endpoint_jump(c.mesh, [&](Index t, const Point2& x) {
        return Mat2(base[t] - 0.5 * outer(c.data.f[t], x - centroid(t)));
    });
    const double symmetric = endpoint_jump(c.mesh, [&](Index t, const Point2& x) {
        return Mat2(base[t] - (2.0 / 3.0) * sym(outer(c.data.f[t], x - centroid(t))));
    });
    EXPECT_LT(row_wise, 1e-10);
    EXPECT_GT(symmetric, 1e-3);
}

TEST(ElasticityGap, ZeroForAffineExactSolution)
{
    const Triangulation mesh = structured_square_mesh(3, mixed_square_labels());
    const ElasticityTensor c(1.0, 5.0);
    const Mat2 g = (Mat2() << 0.3, -0.2, 0.5, 0.1).finished();
    const auto u = [&](const Point2& x) { return Vec2(g * x); };
    const P1Field w = p1_interpolate(mesh, u);
    const RTField sigma = rt_interpolate(mesh, [&](const Point2&) { return Mat2(c.apply(sym(g))); });
    EXPECT_LT(gap_indicator_elasticity(mesh, w, sigma, c).total, 1e-26);
    // Stokes: divergence-free affine velocity, stress nu grad u - p I.
    const Mat2 gs = dev(g);
    const P1Field ws = p1_interpolate(mesh, [&](const Point2& x) { return Vec2(gs * x); });
    const RTField tau = rt_interpolate(mesh, [&](const Point2&) { return Mat2(0.5 * gs - 2.0 * Mat2::Identity()); });
    EXPECT_LT(gap_indicator_stokes(mesh, ws, tau, 0.5).total, 1e-26);
}

// ---------------------------------------------------------------- oscillation

TEST(Oscillation, MatchesIndependentQuadratureForAffineLoad)
{
    const Triangulation mesh = structured_square_mesh(3, all_dirichlet());
    const Mat2 a = (Mat2() << 1.0, 2.0, -1.0, 0.5).finished();
    const auto f = [&](const Point2& x) { return Vec2(a * x); };
    const VectorP0 fh = pi0(mesh, f);
    const Indicators osc = oscillation_indicator(mesh, f, fh, nullptr, {});
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        // |A(x - x_T)|^2 is quadratic: the three-point rule is exact.
        const Point2 xt = mesh.element_geometry(t).centroid;
        const double h = mesh.element_geometry(t).diameter;
        const double local = integrate_element(mesh, t, triangle_rule_degree2(),
                                               [&](const Point2& x) { return (a * (x - xt)).squaredNorm(); });
        EXPECT_NEAR(osc.values[t], h * h / (std::numbers::pi * std::numbers::pi) * local, 1e-15);
    }
}

TEST(Oscillation, ZeroForPiecewiseConstantData)
{
    const Triangulation mesh = structured_square_mesh(2, all_dirichlet());
    const auto f = [](const Point2&) { return Vec2(3.0, -1.0); };
    const auto big = [](const Point2&) { return Mat2(Mat2::Identity()); };
    const Indicators osc = oscillation_indicator(mesh, f, pi0(mesh, f), big, pi0(mesh, big));
    EXPECT_LT(osc.total, 1e-28);
}

TEST(Oscillation, TensorLoadTermHasNoWeight)
{
    const Triangulation mesh = structured_square_mesh(2, all_dirichlet());
    const auto big = [](const Point2& x) { return Mat2(x.x() * Mat2::Identity()); };
    const Indicators osc = oscillation_indicator(mesh, nullptr, {}, big, pi0(mesh, big));
    double expected = 0.0;
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        const double xt = mesh.element_geometry(t).centroid.x();
        expected += 2.0 * integrate_element(mesh, t, triangle_rule_degree2(), [&](const Point2& x) {
            return (x.x() - xt) * (x.x() - xt);
        });
    }
    EXPECT_NEAR(osc.total, expected, 1e-15);
}
