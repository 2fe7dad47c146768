// Command-line driver: adaptive/uniform runs, discrete identity checks and the
// Taylor-Green convergence table.
//
//   crdual run <problem> [--mode uniform|adaptive] [--theta t] [--max-iter n]
//                        [--eps-stop e] [--seed s] [--out path|-] [--format csv|json]
//   crdual verify-identity [problem] [--levels n] [--seeds n] [--seed s] [--tamper]
//   crdual table1 [--levels n] [--seeds n] [--seed s]
//
// Exit status: 0 success, 1 usage error, 2 numerical failure.
#include <crdual/crdual.hpp>
#include <crdual/report.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace crdual;

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string problem;
    std::string mode = "adaptive";
    double theta = 0.5;
    int max_iter = 10;
    double eps_stop = 0.0;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    int levels = 6;
    int seeds = 3;
    double threshold = 1e-6;
    bool tamper = false;
};

ProblemSpec lookup(const std::string& name)
{
    const auto problem = problem_by_name(name);
    if (!problem) {
        std::string known;
        for (const auto& n : problem_names()) {
            known += ' ' + n;
        }
        throw UsageError("unknown problem '" + name + "' (known:" + known + ")");
    }
    return *problem;
}

/// Writes to --out; "-" means stdout. Returns false when no output was requested.
bool emit(const Options& opt, const std::string& text)
{
    if (opt.out.empty()) {
        return false;
    }
    if (opt.out == "-") {
        std::cout << text;
        return true;
    }
    std::ofstream file(opt.out);
    if (!file) {
        throw UsageError("cannot open '" + opt.out + "' for writing");
    }
    file << text;
    return true;
}

std::string cell(const std::optional<double>& v, const char* fmt)
{
    if (!v || !std::isfinite(*v)) {
        return "-";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return buf;
}

int cmd_run(const Options& opt)
{
    const ProblemSpec problem = lookup(opt.problem);
    AdaptiveConfig config;
    config.mode = opt.mode == "uniform" ? RefinementMode::Uniform : RefinementMode::Adaptive;
    config.theta = opt.theta;
    config.max_iter = opt.max_iter;
    config.eps_stop = opt.eps_stop;
    try {
        validate(config);
    }
    catch (const Error& e) {
        throw UsageError(e.what());
    }

    const bool quiet = opt.out == "-";
    if (!quiet) {
        std::printf("%3s %8s %12s %11s %11s %11s %8s %8s %8s\n", "k", "ndof", "estimator", "err_primal",
                    "err_dual", "osc", "eoc_est", "eoc_u", "eoc_T");
    }
    const RunReport report = run_adaptive(problem, config);
    if (!quiet) {
        const auto eoc_at = [&](const char* key, std::size_t i) { return detail::eoc_at(report, key, i); };
        for (std::size_t i = 0; i < report.records.size(); ++i) {
            const IterationRecord& r = report.records[i];
            std::printf("%3d %8lld %12.4e %11s %11s %11.3e %8s %8s %8s\n", r.k, static_cast<long long>(r.num_dof),
                        std::sqrt(r.estimator2), cell(detail::sqrt_opt(r.err_primal2), "%.4e").c_str(),
                        cell(detail::sqrt_opt(r.err_dual2), "%.4e").c_str(), std::sqrt(r.osc2),
                        cell(eoc_at("estimator", i), "%.3f").c_str(), cell(eoc_at("primal", i), "%.3f").c_str(),
                        cell(eoc_at("dual", i), "%.3f").c_str());
        }
        std::printf("stop: %s\n", report.stop_reason.c_str());
    }

    std::ostringstream text;
    if (opt.format == "json") {
        text << run_json(report).dump(2) << '\n';
    }
    else {
        write_run_csv(text, report);
    }
    emit(opt, text.str());

    if (!report.error.empty()) {
        std::cerr << "error: " << report.error << '\n';
        return kExitNumerical;
    }
    return 0;
}

IdentityOptions identity_options(const Options& opt)
{
    IdentityOptions io;
    io.levels = opt.levels;
    io.seeds = opt.seeds;
    io.seed = opt.seed;
    io.tamper = opt.tamper;
    if (io.levels < 1 || io.seeds < 1) {
        throw UsageError("--levels and --seeds must be positive");
    }
    return io;
}

int cmd_verify_identity(const Options& opt)
{
    const ProblemSpec problem = lookup(opt.problem.empty() ? "taylor-green" : opt.problem);
    if (problem.kind != ProblemKind::Stokes || !problem.exact) {
        throw UsageError("verify-identity needs a Stokes problem with exact solution");
    }
    const bool quiet = opt.out == "-";
    bool ok = true;
    const auto on_row = [&](const IdentityRow& r) {
        const bool pass = r.admissible && r.relative_error <= opt.threshold;
        ok = ok && pass;
        if (!quiet) {
            std::printf("level %d sample %d ndof %8lld gap %.6e rho2 %.6e err_iden %.3e%s%s\n", r.level,
                        r.sample + 1, static_cast<long long>(r.num_dof), r.gap, r.rho2_primal + r.rho2_dual,
                        r.relative_error, r.admissible ? "" : " NOT ADMISSIBLE", pass ? "" : " FAIL");
            std::fflush(stdout);
        }
    };
    if (!quiet) {
        std::printf("# %s, threshold %.1e\n", problem.name.c_str(), opt.threshold);
    }
    const std::vector<IdentityRow> rows = verify_identity(problem, identity_options(opt), on_row);

    std::ostringstream text;
    if (opt.format == "json") {
        text << identity_json(rows).dump(2) << '\n';
    }
    else {
        text << detail::join(identity_csv_columns()) << '\n';
        for (const IdentityRow& r : rows) {
            text << identity_csv_row(r) << '\n';
        }
    }
    emit(opt, text.str());
    if (!quiet) {
        std::printf("%s\n", ok ? "identity verified" : "identity VIOLATED");
    }
    return ok ? 0 : kExitNumerical;
}

int cmd_table1(const Options& opt)
{
    const ProblemSpec problem = taylor_green_stokes();
    const bool quiet = opt.out == "-";
    if (!quiet) {
        std::printf("%9s %8s %8s %8s %8s %3s %10s\n", "num_dof", "err_u", "EOC", "err_T", "EOC", "i", "err_iden");
    }
    const auto on_row = [&](const IdentityRow& r) {
        if (quiet) {
            return;
        }
        if (r.sample == 0) {
            std::printf("%9lld %8.4f %8s %8.4f %8s", static_cast<long long>(r.num_dof), std::sqrt(r.err_primal2), "",
                        std::sqrt(r.err_dual2), "");
        }
        else {
            std::printf("%9s %8s %8s %8s %8s", "", "", "", "", "");
        }
        std::printf(" %3d %10.1e\n", r.sample + 1, r.relative_error);
        std::fflush(stdout);
    };
    const std::vector<IdentityRow> rows = verify_identity(problem, identity_options(opt), on_row);
    const std::vector<Table1Row> table = table1_rows(rows);
    if (!quiet) {
        std::printf("EOC:");
        for (const Table1Row& t : table) {
            if (t.eoc_u) {
                std::printf("  (%.4f, %.4f)", *t.eoc_u, *t.eoc_t);
            }
        }
        std::printf("\n");
    }

    std::ostringstream text;
    if (opt.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const Table1Row& t : table) {
            arr.push_back({{"level", t.level},
                           {"num_dof", t.num_dof},
                           {"err_u", t.err_u},
                           {"err_T", t.err_t},
                           {"eoc_u", t.eoc_u ? nlohmann::json(*t.eoc_u) : nlohmann::json(nullptr)},
                           {"eoc_T", t.eoc_t ? nlohmann::json(*t.eoc_t) : nlohmann::json(nullptr)},
                           {"err_iden", t.identity_errors}});
        }
        text << arr.dump(2) << '\n';
    }
    else {
        write_table1_csv(text, table);
    }
    emit(opt, text.str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Crouzeix-Raviart / Raviart-Thomas primal-dual error estimation"};
    app.require_subcommand(1);
    Options opt;

    const auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--out", opt.out, "Report path ('-' for stdout)");
        cmd->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--seed", opt.seed, "Random seed");
    };

    CLI::App* run = app.add_subcommand("run", "Run the adaptive or uniform refinement loop");
    run->add_option("problem", opt.problem, "Problem name")->required();
    run->add_option("--mode", opt.mode, "Refinement mode")->check(CLI::IsMember({"uniform", "adaptive"}));
    run->add_option("--theta", opt.theta, "Max-marking parameter in [0,1]");
    run->add_option("--max-iter", opt.max_iter, "Number of SOLVE-ESTIMATE cycles");
    run->add_option("--eps-stop", opt.eps_stop, "Stop once the squared estimator drops below this");
    add_output(run);

    CLI::App* verify = app.add_subcommand("verify-identity", "Check the discrete primal-dual gap identity");
    verify->add_option("problem", opt.problem, "Stokes problem name (default taylor-green)");
    verify->add_option("--levels", opt.levels, "Uniform refinement levels");
    verify->add_option("--seeds", opt.seeds, "Random pairs per level");
    verify->add_option("--threshold", opt.threshold, "Largest accepted relative identity error");
    verify->add_flag("--tamper", opt.tamper, "Add a non-admissible stress perturbation");
    add_output(verify);

    CLI::App* table = app.add_subcommand("table1", "Taylor-Green errors, rates and identity errors");
    table->add_option("--levels", opt.levels, "Uniform refinement levels");
    table->add_option("--seeds", opt.seeds, "Random pairs per level");
    add_output(table);

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(opt);
        }
        if (verify->parsed()) {
            return cmd_verify_identity(opt);
        }
        return cmd_table1(opt);
    }
    catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
