#include <crdual/crdual.hpp>
#include <crdual/report.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace crdual;

namespace {

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, sep)) {
        out.push_back(cell);
    }
    return out;
}

struct Captured {
    int status = -1;
    std::string out;
};

/// Runs the CLI with the given arguments; stderr is discarded.
Captured run_cli(const std::string& args)
{
    const std::string cmd = std::string(CRDUAL_CLI_PATH) + " " + args + " 2>/dev/null";
    Captured c;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return c;
    }
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        c.out.append(buf.data(), n);
    }
    const int raw = pclose(pipe);
    c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return c;
}

RunReport uniform_run(const ProblemSpec& problem, int iterations)
{
    AdaptiveConfig config;
    config.mode = RefinementMode::Uniform;
    config.max_iter = iterations;
    return run_adaptive(problem, config);
}

} // namespace

// ---------------------------------------------------------------- marking

TEST(MarkMax, ThetaZeroMarksEverything)
{
    const std::vector<double> eta = {0.1, 0.0, 3.0, 2.0};
    EXPECT_EQ(mark_max(eta, 0.0), (std::vector<Index>{0, 1, 2, 3}));
}

TEST(MarkMax, ThetaOneMarksOnlyMaxima)
{
    EXPECT_EQ(mark_max({0.1, 3.0, 2.0, 3.0}, 1.0), (std::vector<Index>{1, 3}));
}

TEST(MarkMax, ThresholdIsInclusive)
{
    EXPECT_EQ(mark_max({1.0, 2.0, 4.0, 1.9999}, 0.5), (std::vector<Index>{1, 2}));
}

TEST(MarkMax, ZeroIndicatorsMarkNothing)
{
    EXPECT_TRUE(mark_max({0.0, 0.0, 0.0}, 0.5).empty());
    EXPECT_TRUE(mark_max({}, 0.5).empty());
}

TEST(MarkMax, RejectsBadInput)
{
    EXPECT_THROW(mark_max({1.0}, -0.1), Error);
    EXPECT_THROW(mark_max({1.0}, 1.5), Error);
    EXPECT_THROW(mark_max({1.0, -1.0}, 0.5), Error);
    EXPECT_THROW(mark_max({std::numeric_limits<double>::quiet_NaN()}, 0.5), Error);
}

// ---------------------------------------------------------------- rates

TEST(Rates, EocOfPowerLawIsItsExponent)
{
    std::vector<double> hs;
    std::vector<double> values;
    for (int k = 0; k < 5; ++k) {
        hs.push_back(std::pow(0.5, k) * 0.3);
        values.push_back(7.0 * std::pow(hs.back(), 1.5));
    }
    const std::vector<double> e = eoc(values, hs);
    ASSERT_EQ(e.size(), 4u);
    for (double v : e) {
        EXPECT_NEAR(v, 1.5, 1e-12);
    }
    EXPECT_THROW(eoc({1.0}, {1.0, 2.0}), Error);
    EXPECT_THROW(eoc({1.0, 0.0}, {1.0, 0.5}), Error);
}

TEST(Rates, FitSlopeRecoversExponent)
{
    const std::vector<double> dofs = {100, 400, 1600, 6400};
    std::vector<double> v;
    for (double n : dofs) {
        v.push_back(3.0 * std::pow(n, -0.5));
    }
    EXPECT_NEAR(fit_slope(dofs, v), -0.5, 1e-12);
    EXPECT_THROW(fit_slope({1.0}, {1.0}), Error);
    EXPECT_THROW(fit_slope({1.0, 2.0}, {1.0}), Error);
}

TEST(Rates, FitSlopeMatchesHandLeastSquares)
{
    // Points (0, 0), (1, 1), (2, 3) in log-log: slope (3*7 - 3*4) / (3*5 - 9) = 1.5.
    const double e = std::exp(1.0);
    EXPECT_NEAR(fit_slope({1.0, e, e * e}, {1.0, e, e * e * e}), 1.5, 1e-12);
}

// ---------------------------------------------------------------- config

TEST(AdaptiveConfig, Validation)
{
    AdaptiveConfig c;
    EXPECT_NO_THROW(validate(c));
    c.theta = 1.2;
    EXPECT_THROW(validate(c), Error);
    c = {};
    c.max_iter = 0;
    EXPECT_THROW(validate(c), Error);
    c = {};
    c.eps_stop = -1.0;
    EXPECT_THROW(validate(c), Error);
}

// ---------------------------------------------------------------- loop

TEST(RunAdaptive, UniformQuadruplesElementsAndHalvesH)
{
    const RunReport r = uniform_run(taylor_green_stokes(), 3);
    ASSERT_TRUE(r.error.empty()) << r.error;
    ASSERT_EQ(r.records.size(), 3u);
    EXPECT_EQ(r.stop_reason, "max_iter");
    for (std::size_t i = 1; i < r.records.size(); ++i) {
        EXPECT_EQ(r.records[i].num_elements, 4 * r.records[i - 1].num_elements);
        EXPECT_NEAR(r.records[i].h_max, 0.5 * r.records[i - 1].h_max, 1e-14);
        EXPECT_EQ(r.records[i - 1].num_marked, r.records[i - 1].num_elements);
        EXPECT_EQ(r.records[i].k, static_cast<int>(i) + 1);
    }
    EXPECT_EQ(r.records.back().num_marked, 0);
    EXPECT_EQ(r.eoc.at("estimator").size(), 2u);
    EXPECT_EQ(r.eoc.at("primal").size(), 2u);
}

TEST(RunAdaptive, RecordsAreConsistent)
{
    const RunReport r = uniform_run(taylor_green_stokes(), 2);
    for (const IterationRecord& rec : r.records) {
        EXPECT_NEAR(rec.estimator2, rec.gap2 + rec.osc2, 1e-12 * rec.estimator2);
        EXPECT_LE(rec.max_indicator, rec.estimator2);
        EXPECT_LT(rec.max_jump, 1e-10);
        EXPECT_LE(rec.solver_residual, 1e-10);
        EXPECT_TRUE(rec.err_primal2.has_value());
    }
    EXPECT_EQ(r.records[0].num_dof, 840);
    EXPECT_EQ(r.records[1].num_dof, stokes_num_dof(refine_uniform(taylor_green_stokes().initial_mesh()).mesh));
}

TEST(RunAdaptive, ThetaZeroBehavesAsUniform)
{
    AdaptiveConfig config;
    config.theta = 0.0;
    config.max_iter = 2;
    const RunReport a = run_adaptive(cook_membrane(), config);
    const RunReport u = uniform_run(cook_membrane(), 2);
    ASSERT_EQ(a.records.size(), u.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].num_elements, u.records[i].num_elements);
        EXPECT_EQ(a.records[i].estimator2, u.records[i].estimator2);
    }
}

TEST(RunAdaptive, EpsStopEndsEarly)
{
    AdaptiveConfig config;
    config.max_iter = 5;
    config.eps_stop = 1e6;
    int observed = 0;
    const RunReport r = run_adaptive(taylor_green_stokes(), config,
                                     [&](const Triangulation& mesh, const IterationRecord& rec) {
                                         ++observed;
                                         EXPECT_EQ(mesh.num_elements(), rec.num_elements);
                                     });
    EXPECT_EQ(r.records.size(), 1u);
    EXPECT_EQ(observed, 1);
    EXPECT_EQ(r.stop_reason, "estimator below tolerance");
}

TEST(RunAdaptive, AdaptiveStepRefinesOnlyAroundMarked)
{
    AdaptiveConfig config;
    config.theta = 0.5;
    config.max_iter = 3;
    const RunReport r = run_adaptive(lshape_stokes(), config);
    ASSERT_TRUE(r.error.empty()) << r.error;
    for (std::size_t i = 1; i < r.records.size(); ++i) {
        const IterationRecord& prev = r.records[i - 1];
        EXPECT_GT(prev.num_marked, 0);
        EXPECT_LT(prev.num_marked, prev.num_elements);
        EXPECT_GT(r.records[i].num_elements, prev.num_elements);
        EXPECT_LT(r.records[i].num_elements, 4 * prev.num_elements);
    }
    EXPECT_GT(r.records.back().elements_near_singularity, r.records.front().elements_near_singularity);
}

// ---------------------------------------------------------------- reports

TEST(Report, FormatNumber)
{
    EXPECT_EQ(format_number(0.5), "0.50000000");
    EXPECT_EQ(format_number(0.0), "0.00000000");
    EXPECT_EQ(format_number(1e-3), "0.00100000");
    EXPECT_EQ(format_number(9.99e-4), "9.990000e-04");
    EXPECT_EQ(format_number(-2.5e-7), "-2.500000e-07");
    EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(format_optional(std::nullopt), "");
}

TEST(Report, RunCsvShape)
{
    const RunReport r = uniform_run(taylor_green_stokes(), 2);
    std::ostringstream out;
    write_run_csv(out, r);
    const std::vector<std::string> lines = split(out.str(), '\n');
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0],
              "k,num_elements,num_dof,h_max,estimator,gap,osc,max_indicator,num_marked,err_primal,err_dual,"
              "eoc_estimator,eoc_primal,eoc_dual,max_jump,solver_residual,elements_near_singularity");
    const std::vector<std::string> first = split(lines[1], ',');
    const std::vector<std::string> second = split(lines[2], ',');
    ASSERT_EQ(first.size(), 17u);
    EXPECT_EQ(first[0], "1");
    EXPECT_EQ(first[2], "840");
    EXPECT_EQ(first[11], "");
    EXPECT_NEAR(std::stod(first[9]), std::sqrt(*r.records[0].err_primal2), 1e-8);
    EXPECT_NEAR(std::stod(second[12]), r.eoc.at("primal")[0], 1e-8);
}

TEST(Report, Table1RowsGroupLevels)
{
    std::vector<IdentityRow> rows;
    for (int level = 1; level <= 2; ++level) {
        for (int s = 0; s < 3; ++s) {
            IdentityRow r;
            r.level = level;
            r.sample = s;
            r.num_dof = 100 * level;
            r.err_primal2 = std::pow(0.25, level);
            r.err_dual2 = std::pow(0.25, level) * 4.0;
            r.relative_error = 1e-12 * (s + 1);
            rows.push_back(r);
        }
    }
    const std::vector<Table1Row> t = table1_rows(rows);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_FALSE(t[0].eoc_u.has_value());
    EXPECT_NEAR(*t[1].eoc_u, 1.0, 1e-14);
    EXPECT_NEAR(*t[1].eoc_t, 1.0, 1e-14);
    EXPECT_EQ(t[1].identity_errors.size(), 3u);
    std::ostringstream out;
    write_table1_csv(out, t);
    EXPECT_EQ(split(out.str(), '\n').size(), 7u);
}

// ---------------------------------------------------------------- command line

TEST(Cli, RunWritesCsvToStdout)
{
    const Captured c = run_cli("run taylor-green --mode uniform --max-iter 2 --out -");
    EXPECT_EQ(c.status, 0);
    const std::vector<std::string> lines = split(c.out, '\n');
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0].rfind("k,num_elements,num_dof", 0), 0u);
    EXPECT_EQ(split(lines[1], ',')[2], "840");
}

TEST(Cli, IdenticalConfigGivesIdenticalCsv)
{
    const std::string args = "run lshape --mode adaptive --theta 0.5 --max-iter 3 --seed 4 --out -";
    const Captured a = run_cli(args);
    const Captured b = run_cli(args);
    EXPECT_EQ(a.status, 0);
    EXPECT_FALSE(a.out.empty());
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, JsonFormatParses)
{
    const Captured c = run_cli("run cook --mode uniform --max-iter 2 --format json --out -");
    EXPECT_EQ(c.status, 0);
    const nlohmann::json j = nlohmann::json::parse(c.out);
    EXPECT_EQ(j.at("problem"), "cook");
    EXPECT_EQ(j.at("records").size(), 2u);
}

TEST(Cli, UsageErrorsExitOne)
{
    EXPECT_EQ(run_cli("run poisson").status, 1);
    EXPECT_EQ(run_cli("run taylor-green --bogus").status, 1);
    EXPECT_EQ(run_cli("run taylor-green --mode sideways").status, 1);
    EXPECT_EQ(run_cli("run taylor-green --theta 2").status, 1);
    EXPECT_EQ(run_cli("").status, 1);
    EXPECT_EQ(run_cli("verify-identity cook").status, 1);
}

TEST(Cli, VerifyIdentityRowsPerLevelAndSeed)
{
    const Captured c = run_cli("verify-identity --levels 2 --seeds 3 --out -");
    EXPECT_EQ(c.status, 0);
    EXPECT_EQ(split(c.out, '\n').size(), 1u + 6u);
    const Captured one = run_cli("verify-identity --levels 3 --seeds 1 --out -");
    EXPECT_EQ(one.status, 0);
    EXPECT_EQ(split(one.out, '\n').size(), 1u + 3u);
}

TEST(Cli, TamperedIdentityExitsTwo)
{
    const Captured c = run_cli("verify-identity --levels 1 --seeds 1 --tamper --out -");
    EXPECT_EQ(c.status, 2);
    const std::vector<std::string> lines = split(c.out, '\n');
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(split(lines[1], ',').back(), "0");
}

TEST(Cli, Table1WritesOneLinePerSample)
{
    const Captured c = run_cli("table1 --levels 2 --seeds 2 --out -");
    EXPECT_EQ(c.status, 0);
    const std::vector<std::string> lines = split(c.out, '\n');
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], "level,num_dof,err_u,eoc_u,err_T,eoc_T,sample,err_iden");
}
