// Solves the Taylor-Green problem on two meshes and prints errors and
// reconstruction residuals.
#include <crdual/crdual.hpp>

#include <cstdio>

int main()
{
    using namespace crdual;
    const ProblemSpec problem = taylor_green_stokes();
    Triangulation mesh = problem.initial_mesh();
    for (int level = 1; level <= 2; ++level) {
        const StokesData data = stokes_data(problem, mesh);
        const StokesSolution sol = solve_and_reconstruct_stokes(mesh, data);
        const StokesErrors err = exact_errors_stokes(problem, mesh, sol);
        std::printf("level %d  dofs %lld  err_u %.4f  err_T %.4f (dev cell average %.4f)\n", level,
                    static_cast<long long>(stokes_num_dof(mesh)), std::sqrt(err.primal2), std::sqrt(err.dual2),
                    std::sqrt(err.dual2_dev_average));
        std::printf("  div residual %.2e  normal jump %.2e  solver residual %.2e\n",
                    divergence_residual(mesh, sol.stress, sol.f), sol.max_jump, sol.report.residual_norm);
        mesh = refine_uniform(mesh).mesh;
    }
    return 0;
}
