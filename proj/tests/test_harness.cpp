#include <cmath>
#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "kcsim/errors.hpp"
#include "kcsim/harness.hpp"
#include "support/studies.hpp"

using namespace kcsim;

namespace {

ConvergenceStudy small_diffusive() {
    ConvergenceStudy s = studies::diffusive();
    s.grid = {1.0, 32};
    s.n_velocity = 8;
    s.t_final = 0.05;
    s.eps_list = {0.4, 0.2, 0.1};
    s.reference_refinement = 2;
    return s;
}

}  // namespace

TEST(Regime, Classification) {
    ModelParams p;
    EXPECT_EQ(classify_regime(p), Regime::Diffusive);
    p.q1 = p.q2 = p.q3 = p.p = 2;
    EXPECT_EQ(classify_regime(p), Regime::OdeLimit);
    p.p = 1;
    EXPECT_THROW(classify_regime(p), RegimeError);
}

TEST(EstimateOrder, ExactPowerLaws) {
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    std::vector<double> linear, quadratic, constant;
    for (double e : eps) {
        linear.push_back(3.0 * e);
        quadratic.push_back(0.5 * e * e);
        constant.push_back(0.01);
    }
    EXPECT_NEAR(estimate_order(eps, linear), 1.0, 1e-10);
    EXPECT_NEAR(estimate_order(eps, quadratic), 2.0, 1e-10);
    EXPECT_NEAR(estimate_order(eps, constant), 0.0, 1e-10);
}

TEST(EstimateOrder, DegenerateInputs) {
    EXPECT_THROW(estimate_order({0.2, 0.1}, {1.0, 0.5}), DegenerateFitError);
    EXPECT_THROW(estimate_order({0.4, 0.2, 0.1}, {1.0, 0.0, 0.5}), DegenerateFitError);
    EXPECT_THROW(estimate_order({0.1, 0.1, 0.1}, {1.0, 0.9, 0.5}), DegenerateFitError);
    EXPECT_THROW(estimate_order({0.4, 0.2, 0.1}, {1.0, 0.5}), DegenerateFitError);
}

TEST(ConvergenceStudy, PreconditionsAreChecked) {
    ConvergenceStudy s = small_diffusive();
    s.eps_list = {0.2, 0.1};
    EXPECT_THROW(run_convergence_study(s), DegenerateFitError);
    s.eps_list = {0.1, 0.2, 0.05};
    EXPECT_THROW(run_convergence_study(s), ValidationError);
    s = small_diffusive();
    s.params.p = 2;
    EXPECT_THROW(run_convergence_study(s), RegimeError);
}

TEST(ConvergenceStudy, StationaryDataHasNoError) {
    ConvergenceStudy s = small_diffusive();
    const SirState q = *equilibria(s.params).qstar;
    s.initial = {};
    s.initial.base = q;
    const ConvergenceReport report = run_convergence_study(s);
    for (const auto& e : report.errors)
        for (double x : e) EXPECT_LE(x, 1e-8);
}

TEST(ConvergenceStudy, ErrorsShrinkInDiffusiveRegime) {
    const ConvergenceReport report = run_convergence_study(small_diffusive());
    const auto maxima = report.max_errors();
    for (std::size_t i = 1; i < maxima.size(); ++i) EXPECT_LT(maxima[i], maxima[i - 1]);
    EXPECT_TRUE(report.order_fitted);
    EXPECT_GT(report.estimated_order, 0.5);
}

TEST(ConvergenceStudy, OdeRegimeOrder) {
    ConvergenceStudy s = studies::ode_limit();
    s.grid = {1.0, 8};
    const ConvergenceReport report = run_convergence_study(s);
    EXPECT_GE(report.estimated_order, 0.8);
    EXPECT_EQ(report.regime_descriptor(), "q1=2,q2=2,q3=2,p=2");
}

TEST(ConvergenceStudy, ThreadCountDoesNotChangeResults) {
    ConvergenceStudy s = small_diffusive();
    s.threads = 1;
    const ConvergenceReport a = run_convergence_study(s);
    s.threads = 3;
    const ConvergenceReport b = run_convergence_study(s);
    EXPECT_EQ(a.errors, b.errors);
}

TEST(ConvergenceStudy, ReferenceIsGridConverged) {
    ConvergenceStudy s = studies::diffusive();
    s.eps_list = {0.2, 0.1, 0.05};
    s.reference_refinement = 2;
    const double coarse = run_convergence_study(s).max_errors().back();
    s.reference_refinement = 4;
    const double fine = run_convergence_study(s).max_errors().back();
    EXPECT_LT(std::abs(coarse - fine) / fine, 0.10);
}

TEST(Report, RoundTripsLosslessly) {
    ConvergenceReport report;
    report.regime = {1, 1, 1, 1};
    report.eps_values = {0.4, 0.2, 0.1};
    report.errors = {{0.1, 0.2, 1.0 / 3.0}, {0.05, 0.1, 0.1 / 3.0}, {0.025, 0.05, 0.01 / 3.0}};
    report.species_order = {1.0, 1.0, std::acos(-1.0)};
    report.estimated_order = 0.987654321;
    report.order_fitted = true;
    report.reference_descriptor = "run_macro rk4 n_cells=512 averaged x4";
    std::stringstream ss;
    write_report(ss, report);
    const ConvergenceReport back = read_report(ss);
    EXPECT_EQ(back.regime, report.regime);
    EXPECT_EQ(back.eps_values, report.eps_values);
    EXPECT_EQ(back.errors, report.errors);
    EXPECT_EQ(back.species_order, report.species_order);
    EXPECT_EQ(back.estimated_order, report.estimated_order);
    EXPECT_EQ(back.order_fitted, report.order_fitted);
    EXPECT_EQ(back.reference_descriptor, report.reference_descriptor);
}

TEST(Report, RejectsMalformedInput) {
    std::stringstream bad_columns("eps,err\n0.1,0.2\n");
    EXPECT_THROW(read_report(bad_columns), ParseError);
    std::stringstream bad_row("epsilon,error_c,error_s,error_u\n0.1,abc,0.1,0.1\n");
    EXPECT_THROW(read_report(bad_row), ParseError);
    std::stringstream empty("# nothing\n");
    EXPECT_THROW(read_report(empty), ParseError);
}

TEST(Threads, Resolution) {
    EXPECT_EQ(resolve_thread_count(3), 3u);
    setenv("KCSIM_THREADS", "2", 1);
    EXPECT_EQ(resolve_thread_count(0), 2u);
    setenv("KCSIM_THREADS", "junk", 1);
    EXPECT_GE(resolve_thread_count(0), 1u);
    unsetenv("KCSIM_THREADS");
}
