#pragma once

#include <crdual/adaptive.hpp>
#include <crdual/problems.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace crdual {

/// CSV number: scientific below 1e-3 in magnitude, fixed otherwise. NaN prints as "nan".
inline std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    if (v != 0.0 && std::abs(v) < 1e-3) {
        std::snprintf(buf, sizeof buf, "%.6e", v);
    }
    else {
        std::snprintf(buf, sizeof buf, "%.8f", v);
    }
    return buf;
}

inline std::string format_optional(const std::optional<double>& v)
{
    return v ? format_number(*v) : std::string();
}

inline const char* to_string(RefinementMode mode)
{
    return mode == RefinementMode::Uniform ? "uniform" : "adaptive";
}

inline const std::vector<std::string>& run_csv_columns()
{
    static const std::vector<std::string> columns = {
        "k",       "num_elements", "num_dof",       "h_max",          "estimator",
        "gap",     "osc",          "max_indicator", "num_marked",     "err_primal",
        "err_dual", "eoc_estimator", "eoc_primal",  "eoc_dual",       "max_jump",
        "solver_residual", "elements_near_singularity"};
    return columns;
}

namespace detail {

inline std::string join(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += cells[i];
    }
    return out;
}

inline std::optional<double> sqrt_opt(const std::optional<double>& v)
{
    if (!v) {
        return std::nullopt;
    }
    return std::sqrt(*v);
}

/// EOC for record k (0-based); empty for the first record or missing series.
inline std::optional<double> eoc_at(const RunReport& report, const std::string& key, std::size_t k)
{
    const auto it = report.eoc.find(key);
    if (k == 0 || it == report.eoc.end() || k - 1 >= it->second.size()) {
        return std::nullopt;
    }
    return it->second[k - 1];
}

} // namespace detail

inline void write_run_csv(std::ostream& out, const RunReport& report)
{
    out << detail::join(run_csv_columns()) << '\n';
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const IterationRecord& r = report.records[i];
        out << detail::join({std::to_string(r.k), std::to_string(r.num_elements), std::to_string(r.num_dof),
                             format_number(r.h_max), format_number(std::sqrt(r.estimator2)),
                             format_number(std::sqrt(r.gap2)), format_number(std::sqrt(r.osc2)),
                             format_number(r.max_indicator), std::to_string(r.num_marked),
                             format_optional(detail::sqrt_opt(r.err_primal2)),
                             format_optional(detail::sqrt_opt(r.err_dual2)),
                             format_optional(detail::eoc_at(report, "estimator", i)),
                             format_optional(detail::eoc_at(report, "primal", i)),
                             format_optional(detail::eoc_at(report, "dual", i)), format_number(r.max_jump),
                             format_number(r.solver_residual), std::to_string(r.elements_near_singularity)})
            << '\n';
    }
}

inline nlohmann::json run_json(const RunReport& report)
{
    using nlohmann::json;
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json records = json::array();
    for (const IterationRecord& r : report.records) {
        records.push_back({{"k", r.k},
                           {"num_elements", r.num_elements},
                           {"num_dof", r.num_dof},
                           {"h_max", r.h_max},
                           {"estimator2", r.estimator2},
                           {"gap2", r.gap2},
                           {"osc2", r.osc2},
                           {"max_indicator", r.max_indicator},
                           {"num_marked", r.num_marked},
                           {"err_primal2", opt(r.err_primal2)},
                           {"err_dual2", opt(r.err_dual2)},
                           {"max_jump", r.max_jump},
                           {"solver_residual", r.solver_residual},
                           {"elements_near_singularity", r.elements_near_singularity},
                           {"wall_time", r.wall_time}});
    }
    json eoc = json::object();
    for (const auto& [key, values] : report.eoc) {
        json arr = json::array();
        for (double v : values) {
            arr.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        }
        eoc[key] = arr;
    }
    return {{"problem", report.problem},
            {"config",
             {{"mode", to_string(report.config.mode)},
              {"theta", report.config.theta},
              {"max_iter", report.config.max_iter},
              {"eps_stop", report.config.eps_stop}}},
            {"records", records},
            {"eoc", eoc},
            {"stop_reason", report.stop_reason},
            {"error", report.error}};
}

inline const std::vector<std::string>& identity_csv_columns()
{
    static const std::vector<std::string> columns = {"level",     "sample", "num_dof",        "rho2_primal",
                                                     "rho2_dual", "gap",    "relative_error", "admissible"};
    return columns;
}

inline std::string identity_csv_row(const IdentityRow& r)
{
    return detail::join({std::to_string(r.level), std::to_string(r.sample), std::to_string(r.num_dof),
                         format_number(r.rho2_primal), format_number(r.rho2_dual), format_number(r.gap),
                         format_number(r.relative_error), r.admissible ? "1" : "0"});
}

inline nlohmann::json identity_json(const std::vector<IdentityRow>& rows)
{
    nlohmann::json out = nlohmann::json::array();
    for (const IdentityRow& r : rows) {
        out.push_back({{"level", r.level},
                       {"sample", r.sample},
                       {"num_dof", r.num_dof},
                       {"err_primal2", r.err_primal2},
                       {"err_dual2", r.err_dual2},
                       {"rho2_primal", r.rho2_primal},
                       {"rho2_dual", r.rho2_dual},
                       {"gap", r.gap},
                       {"relative_error", r.relative_error},
                       {"admissible", r.admissible}});
    }
    return out;
}

/// One row per level of the uniform Taylor-Green sequence.
struct Table1Row {
    int level = 0;
    Index num_dof = 0;
    double err_u = 0.0;
    double err_t = 0.0;
    std::optional<double> eoc_u;
    std::optional<double> eoc_t;
    std::vector<double> identity_errors;
};

/// Groups identity rows by level; uniform refinement halves h, so
/// EOC = log2(err_{k-1} / err_k).
inline std::vector<Table1Row> table1_rows(const std::vector<IdentityRow>& rows)
{
    std::vector<Table1Row> out;
    for (const IdentityRow& r : rows) {
        if (out.empty() || out.back().level != r.level) {
            Table1Row t;
            t.level = r.level;
            t.num_dof = r.num_dof;
            t.err_u = std::sqrt(r.err_primal2);
            t.err_t = std::sqrt(r.err_dual2);
            if (!out.empty()) {
                t.eoc_u = std::log2(out.back().err_u / t.err_u);
                t.eoc_t = std::log2(out.back().err_t / t.err_t);
            }
            out.push_back(t);
        }
        out.back().identity_errors.push_back(r.relative_error);
    }
    return out;
}

inline const std::vector<std::string>& table1_csv_columns()
{
    static const std::vector<std::string> columns = {"level", "num_dof", "err_u",  "eoc_u",
                                                     "err_T", "eoc_T",   "sample", "err_iden"};
    return columns;
}

inline void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows)
{
    out << detail::join(table1_csv_columns()) << '\n';
    for (const Table1Row& t : rows) {
        for (std::size_t i = 0; i < t.identity_errors.size(); ++i) {
            out << detail::join({std::to_string(t.level), std::to_string(t.num_dof), format_number(t.err_u),
                                 format_optional(t.eoc_u), format_number(t.err_t), format_optional(t.eoc_t),
                                 std::to_string(i + 1), format_number(t.identity_errors[i])})
                << '\n';
        }
    }
}

} // namespace crdual
