#pragma once

#include <crdual/duality.hpp>
#include <crdual/mesh.hpp>
#include <crdual/problems.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crdual {

enum class RefinementMode { Adaptive, Uniform };

struct AdaptiveConfig {
    double theta = 0.5;
    int max_iter = 10;
    double eps_stop = 0.0;
    RefinementMode mode = RefinementMode::Adaptive;
    MarkedSplit split = MarkedSplit::AllSides;
};

inline void validate(const AdaptiveConfig& config)
{
    if (!(config.theta >= 0.0 && config.theta <= 1.0)) {
        throw Error("AdaptiveConfig: theta must lie in [0,1]");
    }
    if (config.max_iter < 1) {
        throw Error("AdaptiveConfig: max_iter must be positive");
    }
    if (!(config.eps_stop >= 0.0)) {
        throw Error("AdaptiveConfig: eps_stop must be nonnegative");
    }
}

struct IterationRecord {
    int k = 0;
    Index num_elements = 0;
    Index num_dof = 0;
    double h_max = 0.0;
    double estimator2 = 0.0;   ///< sum of eta^2_T = gap^2_T + osc^2_T
    double gap2 = 0.0;
    double osc2 = 0.0;
    double max_indicator = 0.0;
    Index num_marked = 0;
    std::optional<double> err_primal2;
    std::optional<double> err_dual2;
    double max_jump = 0.0;
    double solver_residual = 0.0;
    Index elements_near_singularity = 0;
    double wall_time = 0.0;
};

struct RunReport {
    std::string problem;
    AdaptiveConfig config;
    std::vector<IterationRecord> records;
    std::map<std::string, std::vector<double>> eoc;
    std::string stop_reason;
    std::string error; ///< set when a failure aborted the loop
};

/// Elements with eta^2_T >= theta * max eta^2; empty when every indicator is zero.
inline std::vector<Index> mark_max(const std::vector<double>& indicators, double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw Error("mark_max: theta must lie in [0,1]");
    }
    double max = 0.0;
    for (double v : indicators) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw Error("mark_max: indicators must be finite and nonnegative");
        }
        max = std::max(max, v);
    }
    std::vector<Index> out;
    if (max == 0.0) {
        return out;
    }
    for (std::size_t t = 0; t < indicators.size(); ++t) {
        if (indicators[t] >= theta * max) {
            out.push_back(static_cast<Index>(t));
        }
    }
    return out;
}

/// Orders (log e_k - log e_{k-1}) / (log h_k - log h_{k-1}).
inline std::vector<double> eoc(const std::vector<double>& values, const std::vector<double>& hs)
{
    if (values.size() != hs.size()) {
        throw Error("eoc: length mismatch");
    }
    std::vector<double> out;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (!(values[k] > 0.0 && values[k - 1] > 0.0 && hs[k] > 0.0 && hs[k - 1] > 0.0)) {
            throw Error("eoc: values and mesh sizes must be positive");
        }
        out.push_back((std::log(values[k]) - std::log(values[k - 1])) / (std::log(hs[k]) - std::log(hs[k - 1])));
    }
    return out;
}

/// Least-squares slope of log(value) against log(dof).
inline double fit_slope(const std::vector<double>& dofs, const std::vector<double>& values)
{
    if (dofs.size() != values.size() || dofs.size() < 2) {
        throw Error("fit_slope: need at least two points");
    }
    const double n = static_cast<double>(dofs.size());
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        const double x = std::log(dofs[i]);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Result of SOLVE and ESTIMATE on one mesh.
struct EstimateResult {
    IterationRecord record;
    std::vector<double> indicators;
};

inline EstimateResult solve_and_estimate(const ProblemSpec& problem, const Triangulation& mesh)
{
    EstimateResult out;
    IterationRecord& rec = out.record;
    rec.num_elements = mesh.num_elements();
    rec.h_max = mesh.max_diameter();
    Indicators gap;
    VectorP0 f_h;
    if (problem.kind == ProblemKind::Stokes) {
        const StokesData data = stokes_data(problem, mesh);
        const StokesSolution sol = solve_and_reconstruct_stokes(mesh, data);
        rec.num_dof = stokes_num_dof(mesh);
        rec.max_jump = sol.max_jump;
        rec.solver_residual = sol.report.residual_norm;
        const P1Field w = conforming_total(problem, mesh, sol.total());
        gap = gap_indicator_stokes(mesh, w, sol.stress, sol.nu);
        f_h = data.f;
        if (problem.exact) {
            const StokesErrors err = exact_errors_stokes(problem, mesh, sol);
            rec.err_primal2 = err.primal2;
            rec.err_dual2 = err.dual2;
        }
    }
    else {
        const ElasticityData data = elasticity_data(problem, mesh);
        const ElasticitySolution sol = solve_and_reconstruct_elasticity(mesh, data);
        rec.num_dof = elasticity_num_dof(mesh);
        rec.max_jump = sol.max_jump;
        rec.solver_residual = sol.report.residual_norm;
        const P1Field w = conforming_total(problem, mesh, sol.total());
        gap = gap_indicator_elasticity(mesh, w, sol.sigma, sol.c);
        f_h = data.f;
        if (problem.exact) {
            const ElasticityErrors err = exact_errors_elasticity(problem, mesh, w, sol.sigma);
            rec.err_primal2 = err.primal2;
            rec.err_dual2 = err.dual2;
        }
    }
    const Indicators osc = oscillation_indicator(mesh, problem.f, f_h, problem.big_f, {});
    out.indicators.resize(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        out.indicators[t] = gap.values[t] + osc.values[t];
        rec.estimator2 += out.indicators[t];
        rec.max_indicator = std::max(rec.max_indicator, out.indicators[t]);
    }
    rec.gap2 = gap.total;
    rec.osc2 = osc.total;
    if (problem.singular_point) {
        for (Index t = 0; t < mesh.num_elements(); ++t) {
            if ((mesh.element_geometry(t).centroid - *problem.singular_point).norm() < 0.1) {
                ++rec.elements_near_singularity;
            }
        }
    }
    return out;
}

namespace detail {

inline void fill_eoc(RunReport& report)
{
    std::vector<double> hs;
    std::vector<double> est;
    std::vector<double> primal;
    std::vector<double> dual;
    bool have_errors = true;
    for (const auto& r : report.records) {
        hs.push_back(r.h_max);
        est.push_back(std::sqrt(r.estimator2));
        have_errors = have_errors && r.err_primal2 && r.err_dual2 && *r.err_primal2 > 0.0 && *r.err_dual2 > 0.0;
        if (have_errors) {
            primal.push_back(std::sqrt(*r.err_primal2));
            dual.push_back(std::sqrt(*r.err_dual2));
        }
    }
    const auto safe = [](const std::vector<double>& v, const std::vector<double>& h) {
        std::vector<double> out;
        for (std::size_t k = 1; k < v.size(); ++k) {
            if (v[k] > 0.0 && v[k - 1] > 0.0 && h[k] != h[k - 1]) {
                out.push_back(eoc({v[k - 1], v[k]}, {h[k - 1], h[k]})[0]);
            }
            else {
                out.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        return out;
    };
    report.eoc["estimator"] = safe(est, hs);
    if (have_errors) {
        report.eoc["primal"] = safe(primal, hs);
        report.eoc["dual"] = safe(dual, hs);
    }
}

} // namespace detail

/// SOLVE, ESTIMATE, MARK, REFINE until the estimator drops below eps_stop or
/// max_iter iterations have run. Uniform mode (or theta = 0) splits every
/// element into four so that h halves.
inline RunReport run_adaptive(const ProblemSpec& problem, const AdaptiveConfig& config,
                              const std::function<void(const Triangulation&, const IterationRecord&)>& observer = {})
{
    validate(config);
    RunReport report;
    report.problem = problem.name;
    report.config = config;
    Triangulation mesh = problem.initial_mesh();
    const bool uniform = config.mode == RefinementMode::Uniform || config.theta == 0.0;
    for (int k = 1; k <= config.max_iter; ++k) {
        const auto start = std::chrono::steady_clock::now();
        EstimateResult est;
        try {
            est = solve_and_estimate(problem, mesh);
        }
        catch (const Error& e) {
            report.error = e.what();
            report.stop_reason = "failure";
            break;
        }
        IterationRecord& rec = est.record;
        rec.k = k;
        const bool converged = rec.estimator2 < config.eps_stop || rec.max_indicator == 0.0;
        const bool last = k == config.max_iter;
        std::vector<Index> marked;
        if (!converged && !last) {
            marked = uniform ? std::vector<Index>{} : mark_max(est.indicators, config.theta);
            rec.num_marked = uniform ? mesh.num_elements() : static_cast<Index>(marked.size());
        }
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.records.push_back(rec);
        if (observer) {
            observer(mesh, rec);
        }
        if (converged) {
            report.stop_reason = "estimator below tolerance";
            break;
        }
        if (last) {
            report.stop_reason = "max_iter";
            break;
        }
        mesh = uniform ? refine_uniform(mesh).mesh : refine_bisection(mesh, marked, config.split).mesh;
    }
    detail::fill_eoc(report);
    return report;
}

} // namespace crdual
