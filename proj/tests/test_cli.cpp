#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "kcsim/cli.hpp"
#include "kcsim/csv.hpp"
#include "kcsim/errors.hpp"
#include "kcsim/harness.hpp"

using namespace kcsim;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("kcsim_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }

    int run(const std::vector<std::string>& args) {
        std::vector<const char*> argv{"kcsim"};
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string slurp(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    /// Non-comment lines of a CSV file.
    static std::vector<std::string> body(const fs::path& path) {
        std::ifstream in(path);
        std::vector<std::string> lines;
        for (std::string line; std::getline(in, line);)
            if (!line.empty() && line.front() != '#') lines.push_back(line);
        return lines;
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

const std::string kCoeffsConfig = "[model]\nvmax = 1\nsigma1 = 1\nsigma2 = 1\nsigma3 = 1\nchi0 = 1\n";

}  // namespace

TEST(Subcommand, Names) {
    for (auto sub : {Subcommand::Ode, Subcommand::Macro, Subcommand::Kinetic, Subcommand::Converge, Subcommand::Coeffs})
        EXPECT_EQ(parse_subcommand(subcommand_name(sub)), sub);
    EXPECT_THROW(parse_subcommand("plot"), ParseError);
}

TEST(ParseConfig, MinimalConfigFillsDefaults) {
    const RunConfig c = parse_config("[model]\nr = 2\n");
    EXPECT_EQ(c.params.r, 2.0);
    EXPECT_EQ(c.params.d1, 1.0);
    EXPECT_EQ(c.params.chi0, 1.0);
    EXPECT_EQ(c.n_velocity, 16u);
    EXPECT_EQ(c.grid.n_cells, 128u);
    EXPECT_EQ(c.initial.kind, InitialProfile::Kind::Constant);
    EXPECT_EQ(c.eps_list, (std::vector<double>{0.4, 0.2, 0.1, 0.05}));
    EXPECT_EQ(c.transport, TransportScheme::Spectral);
    EXPECT_EQ(c.output_dir, fs::path("."));
    EXPECT_EQ(parse_config("").entries.size(), c.entries.size());
}

TEST(ParseConfig, CommentsAndWhitespace) {
    const RunConfig c = parse_config("# top\n\n  [ run ]  \n t_final=2.5 # trailing\n transport = upwind\n");
    EXPECT_EQ(c.t_final, 2.5);
    EXPECT_EQ(c.transport, TransportScheme::Upwind);
}

TEST(ParseConfig, ExponentBound) {
    try {
        parse_config("[model]\nq1 = 0\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("q_i >= 1"), std::string::npos);
    }
}

TEST(ParseConfig, UnknownKeyIsNamed) {
    try {
        parse_config("[model]\nbetaa = 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("betaa"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ParseConfig, SyntaxErrors) {
    EXPECT_THROW(parse_config("[model\n"), ParseError);
    EXPECT_THROW(parse_config("[plot]\n"), ParseError);
    EXPECT_THROW(parse_config("r = 1\n"), ParseError);
    EXPECT_THROW(parse_config("[model]\nr 1\n"), ParseError);
    EXPECT_THROW(parse_config("[model]\nr = 1\nr = 2\n"), ParseError);
    EXPECT_THROW(parse_config("[model]\nr = two\n"), ParseError);
    EXPECT_THROW(parse_config("[space]\nn_cells = 12.5\n"), ParseError);
}

TEST(ParseConfig, ValidationErrors) {
    EXPECT_THROW(parse_config("[model]\nd1 = 0\n"), ValidationError);
    EXPECT_THROW(parse_config("[velocity]\nn_nodes = 7\n"), ValidationError);
    EXPECT_THROW(parse_config("[run]\neps_list = 0.1, 0.2, 0.05\n"), ValidationError);
    EXPECT_THROW(parse_config("[run]\nepsilon = 0\n"), ValidationError);
    EXPECT_THROW(parse_config("[run]\ncfl = 1.5\n"), ValidationError);
    EXPECT_THROW(parse_config("[run]\ntransport = weno\n"), ValidationError);
    EXPECT_THROW(parse_config("[run]\nt_final = 1\nsnapshot_times = 2\n"), ValidationError);
    EXPECT_THROW(parse_config("[initial]\nprofile = cosine\namplitude = 1.5\n"), ValidationError);
    EXPECT_THROW(parse_config("[initial]\nprofile = file\n"), ValidationError);
    EXPECT_THROW(parse_config("[initial]\nc = -1\n"), ValidationError);
}

TEST_F(CliTest, ReferencedFilesMustExist) {
    EXPECT_THROW(parse_config("[initial]\nprofile = file\nfile = missing.csv\n", dir_), ValidationError);
    write("cells.csv", "c,s,u\n1,2,3\n4,5,6\n");
    const RunConfig c = parse_config("[space]\nn_cells = 4\n[initial]\nprofile = file\nfile = cells.csv\n", dir_);
    EXPECT_EQ(c.initial.cells.size(), 2u);
    EXPECT_EQ(c.initial.cells[1], (SirState{4, 5, 6}));
    write("r.csv", "r\n1\n2\n3\n");
    EXPECT_THROW(parse_config("[model]\nr_file = r.csv\n[space]\nn_cells = 4\n", dir_), ValidationError);
    write("r4.csv", "1\n2\n3\n4\n");
    const RunConfig r = parse_config("[model]\nr_file = r4.csv\n[space]\nn_cells = 4\n", dir_);
    EXPECT_EQ(*r.r_field, (std::vector<double>{1, 2, 3, 4}));
    EXPECT_THROW(validate_for(Subcommand::Kinetic, r), ValidationError);
    EXPECT_NO_THROW(validate_for(Subcommand::Macro, r));
}

TEST(ConfigHeader, EchoesEveryKeyAndVersion) {
    const RunConfig c = parse_config("[model]\nbeta = 0.5\n");
    const auto header = config_header(Subcommand::Ode, c);
    EXPECT_EQ(header[0], "# kcsim " + std::string(toolkit_version()));
    EXPECT_EQ(header[1], "# subcommand = ode");
    bool found = false;
    for (const auto& line : header) {
        EXPECT_EQ(line.front(), '#');
        if (line.starts_with("# [model] beta = 0.5  (beta")) found = true;
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(header.size(), c.entries.size() + 2 - 1);
}

TEST_F(CliTest, CoeffsOracleAndSchema) {
    const auto cfg = write("c.ini", kCoeffsConfig);
    ASSERT_EQ(run({"coeffs", "--config", cfg.string(), "--out", (dir_ / "o").string()}), 0) << err_.str();
    const auto lines = body(dir_ / "o" / "coefficients.csv");
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "Dc,Ds,Du,chi");
    const auto cells = split_csv_row(lines[1]);
    ASSERT_EQ(cells.size(), 4u);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(parse_double(cells[static_cast<std::size_t>(i)], "D"), 1.0 / 3.0, 5e-13);
    EXPECT_NEAR(parse_double(cells[3], "chi"), 2.0 / 3.0, 5e-13);
}

TEST_F(CliTest, OdeReportsEndemicEquilibrium) {
    const auto cfg = write("o.ini", "[model]\nr = 2\n[run]\nt_final = 0.5\ndt = 0.1\n");
    ASSERT_EQ(run({"ode", "--config", cfg.string(), "--out", (dir_ / "o").string()}), 0) << err_.str();
    const auto eq = body(dir_ / "o" / "ode_equilibria.csv");
    EXPECT_EQ(eq, (std::vector<std::string>{"r0,point,u,v,w", "2,q0,2,0,0", "2,qstar,1,1,1"}));
    const auto traj = body(dir_ / "o" / "ode_trajectory.csv");
    ASSERT_EQ(traj.size(), 7u);
    EXPECT_EQ(traj[0], "time,u,v,w");
    EXPECT_EQ(traj[1], "0,1.5,0.5,0.5");
}

TEST_F(CliTest, OutputsStartWithHeader) {
    const auto cfg = write("m.ini", "[space]\nn_cells = 8\n[velocity]\nn_nodes = 8\n[initial]\nprofile = cosine\n[run]\nt_final = 0.02\nepsilon = 0.5\n");
    for (const char* sub : {"ode", "macro", "kinetic", "coeffs"}) {
        ASSERT_EQ(run({sub, "--config", cfg.string(), "--out", (dir_ / sub).string()}), 0) << err_.str();
        for (const auto& entry : fs::directory_iterator(dir_ / sub)) {
            const std::string text = slurp(entry.path());
            EXPECT_TRUE(text.starts_with("# kcsim " + std::string(toolkit_version()) + "\n# subcommand = " + sub))
                << entry.path();
            EXPECT_NE(text.find("# [run] t_final = 0.02"), std::string::npos);
        }
    }
    const auto macro = body(dir_ / "macro" / "macro_snapshots.csv");
    EXPECT_EQ(macro.front(), "time,x,c,s,u");
    EXPECT_EQ(macro.size(), 1u + 2u * 8u);
    const auto kinetic = body(dir_ / "kinetic" / "kinetic_snapshots.csv");
    EXPECT_EQ(kinetic.front(), "time,x,c,s,u");
    EXPECT_EQ(kinetic.size(), 1u + 2u * 8u);
}

TEST_F(CliTest, ConvergeWritesReportAndSummary) {
    const auto cfg = write("c.ini",
                           "[space]\nn_cells = 16\n[velocity]\nn_nodes = 8\n[initial]\nprofile = cosine\n"
                           "[run]\nt_final = 0.02\neps_list = 0.4, 0.2, 0.1\nreference_refinement = 2\n");
    ASSERT_EQ(run({"converge", "--config", cfg.string(), "--out", (dir_ / "o").string()}), 0) << err_.str();
    EXPECT_NE(out_.str().find("fitted_order regime=q1=1,q2=1,q3=1,p=1"), std::string::npos);
    std::ifstream in(dir_ / "o" / "convergence.csv");
    const ConvergenceReport report = read_report(in);
    EXPECT_EQ(report.eps_values, (std::vector<double>{0.4, 0.2, 0.1}));
}

TEST_F(CliTest, ErrorExitCodes) {
    const auto two = write("two.ini", "[run]\neps_list = 0.2, 0.1\n");
    EXPECT_EQ(run({"converge", "--config", two.string(), "--out", dir_.string()}), DegenerateFitError("").exit_code());
    EXPECT_TRUE(err_.str().starts_with("error kind=DegenerateFitError code=18 message=\""));
    const std::string message = err_.str();
    EXPECT_EQ(std::count(message.begin(), message.end(), '\n'), 1);

    const auto typo = write("typo.ini", "[model]\nbetaa = 1\n");
    EXPECT_EQ(run({"ode", "--config", typo.string()}), 2);
    EXPECT_NE(err_.str().find("betaa"), std::string::npos);

    const auto q = write("q.ini", "[model]\nq1 = 0\n");
    EXPECT_EQ(run({"ode", "--config", q.string()}), 3);
    EXPECT_EQ(run({"ode", "--config", (dir_ / "none.ini").string()}), 4);
    EXPECT_EQ(run({"plot", "--config", q.string()}), 2);
    EXPECT_EQ(run({"ode"}), 2);
    EXPECT_EQ(run({}), 2);

    const auto regime = write("r.ini", "[model]\np = 2\n");
    EXPECT_EQ(run({"converge", "--config", regime.string(), "--out", dir_.string()}), 17);
}

TEST_F(CliTest, HelpAndVersion) {
    EXPECT_EQ(run({"--help"}), 0);
    EXPECT_NE(out_.str().find("converge"), std::string::npos);
    EXPECT_EQ(run({"--version"}), 0);
    EXPECT_EQ(out_.str(), "kcsim " + std::string(toolkit_version()) + "\n");
}

TEST_F(CliTest, GoldenFiles) {
    const fs::path golden = fs::path(KCSIM_GOLDEN_DIR);
    const auto cfg = write("c.ini", kCoeffsConfig);
    ASSERT_EQ(run({"coeffs", "--config", cfg.string(), "--out", (dir_ / "c").string()}), 0);
    EXPECT_EQ(slurp(dir_ / "c" / "coefficients.csv"), slurp(golden / "coefficients.csv"));
    const auto ode = write("o.ini", "[model]\nr = 2\n[run]\nt_final = 0.5\ndt = 0.1\n");
    ASSERT_EQ(run({"ode", "--config", ode.string(), "--out", (dir_ / "o").string()}), 0);
    EXPECT_EQ(slurp(dir_ / "o" / "ode_equilibria.csv"), slurp(golden / "ode_equilibria.csv"));
    EXPECT_EQ(slurp(dir_ / "o" / "ode_trajectory.csv"), slurp(golden / "ode_trajectory.csv"));
}
