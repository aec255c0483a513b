#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ejecta/commands.hpp"

using namespace ejecta;
using namespace ejecta::cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(const std::string& command, const std::string& target, const CommandOptions& opt = {}) {
  std::ostringstream out, err;
  const int code = run(command, target, opt, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(EJECTA_SOURCE_DIR) + "/tests/data/" + name; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("ejecta_cli_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

// Rows of a dim-1 CSV as (lambda, p) pairs.
std::vector<std::pair<double, double>> rows(const std::string& csv) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace

TEST(Cli, ZerosReportsIndices) {
  const auto r = call("zeros", "exNTse");
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("count = 2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("index = +1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("index = -1"), std::string::npos) << r.out;
}

TEST(Cli, ZerosOnFieldWithoutZeros) {
  const auto r = call("zeros", data("no_zeros.toml"));
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("count = 0"), std::string::npos) << r.out;
}

TEST(Cli, ClassifyReports) {
  const auto simp = call("classify", "exsimp");
  EXPECT_EQ(simp.code, kOk);
  EXPECT_NE(simp.out.find("NonResonant"), std::string::npos);
  EXPECT_NE(simp.out.find("tangent -1.5"), std::string::npos) << simp.out;

  const auto tang = call("classify", "ex2tang");
  EXPECT_EQ(tang.code, kOk);
  for (const char* s : {"lambda'' = -4", "lambda'' = 4", "lambda'' = 0", "TwoSolutions", "NoSolutions"})
    EXPECT_NE(tang.out.find(s), std::string::npos) << s << "\n" << tang.out;

  const auto planar = call("classify", "ex3d");
  EXPECT_EQ(planar.code, kOk);
  EXPECT_NE(planar.out.find("Ejecting2D"), std::string::npos) << planar.out;
}

TEST(Cli, Multiplicity) {
  EXPECT_NE(call("multiplicity", "exNTse").out.find("n = 2\n"), std::string::npos);
  EXPECT_NE(call("multiplicity", "ex2tang").out.find("n = 3\n"), std::string::npos);
  const auto one = call("multiplicity", "exsimp");
  EXPECT_NE(one.out.find("n = 1\n"), std::string::npos) << one.out;
  EXPECT_NE(one.out.find("assumed, not verified"), std::string::npos);
}

TEST(Cli, MultiplicityBoundaryZeroGivesGuidance) {
  const auto r = call("multiplicity", data("boundary_zero.toml"));
  EXPECT_EQ(r.code, kFailure);
  EXPECT_NE(r.err.find("window"), std::string::npos) << r.err;
}

TEST(Cli, SampleExtangHasOnlyZeroAtLambdaZero) {
  const auto dir = temp_dir("sample");
  CommandOptions opt;
  opt.out_path = (dir / "out.csv").string();
  const auto r = call("sample", "extang", opt);
  ASSERT_EQ(r.code, kOk) << r.err;
  std::vector<double> at_zero;
  for (const auto& [l, p] : rows(read_file(dir / "out.csv")))
    if (l == 0.0) at_zero.push_back(p);
  ASSERT_EQ(at_zero.size(), 1u);
  EXPECT_NEAR(at_zero[0], 0.0, 1e-9);
  std::filesystem::remove_all(dir);
}

TEST(Cli, SampleRemnosoAgreeHasNoSmallSolutions) {
  const auto dir = temp_dir("remnoso");
  CommandOptions opt;
  opt.out_path = (dir / "out.csv").string();
  ASSERT_EQ(call("sample", "remnoso-agree", opt).code, kOk);
  int checked_slices = 0;
  double last = -1.0;
  for (const auto& [l, p] : rows(read_file(dir / "out.csv")))
    if (l > 0.0 && l <= 0.05) EXPECT_GT(std::abs(p), 0.2) << "lambda " << l;
  // the default grid does hit (0, 0.05]
  for (double l : atlas::lambda_grid(bundled::load("remnoso-agree").window, opt.lambda_grid))
    if (l > 0.0 && l <= 0.05 && l != last) {
      ++checked_slices;
      last = l;
    }
  EXPECT_GT(checked_slices, 0);
  std::filesystem::remove_all(dir);
}

TEST(Cli, BranchFromExsimp) {
  const auto dir = temp_dir("branch");
  CommandOptions opt;
  opt.out_path = (dir / "b.csv").string();
  opt.from = 0.0;
  const auto r = call("branch", "exsimp", opt);
  ASSERT_EQ(r.code, kOk) << r.err << r.out;
  const auto pts = rows(read_file(dir / "b.csv"));
  EXPECT_GE(pts.size(), 100u);
  double hi = 0.0;
  for (const auto& [l, p] : pts) hi = std::max(hi, l);
  EXPECT_GT(hi, 0.29);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ReproduceWritesFilesAndReport) {
  const auto dir = temp_dir("reproduce");
  CommandOptions opt;
  opt.out_path = dir.string();
  const auto r = call("reproduce", "exsimp", opt);
  EXPECT_EQ(r.code, kOk) << r.err;
  const std::string report = read_file(dir / "exsimp_report.txt");
  EXPECT_NE(report.find("p'(0) = -1.500000 (expected -1.5 ± 1e-6): PASS"), std::string::npos) << report;
  EXPECT_EQ(read_file(dir / "exsimp_cloud.csv").rfind("lambda,p\n", 0), 0u);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ReproducePlanarReport) {
  const auto dir = temp_dir("reproduce3d");
  CommandOptions opt;
  opt.out_path = dir.string();
  const auto r = call("reproduce", "ex3d", opt);
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("Ejecting2D"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("index"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto unknown = call("reproduce", "exnope");
  EXPECT_EQ(unknown.code, kUsage);
  EXPECT_NE(unknown.err.find("exNTse"), std::string::npos) << unknown.err;
  EXPECT_EQ(call("zeros", data("absent.toml")).code, kUsage);
  const auto malformed = call("zeros", data("malformed.toml"));
  EXPECT_EQ(malformed.code, kUsage);
  EXPECT_NE(malformed.err.find("7:"), std::string::npos) << malformed.err;
  EXPECT_EQ(call("classify", data("bad_expression.toml")).code, kUsage);
  EXPECT_EQ(call("launch", "exNTse").code, kUsage);
  CommandOptions opt;
  opt.out_path = "/nonexistent-dir/x.csv";
  EXPECT_EQ(call("sample", "exNTse", opt).code, kFailure);
}

TEST(Cli, CommandsAreIdempotent) {
  for (const char* command : {"zeros", "classify", "multiplicity"})
    for (const char* id : {"exNTse", "ex2tang"}) EXPECT_EQ(call(command, id).out, call(command, id).out);

  const auto dir = temp_dir("idem");
  CommandOptions opt;
  opt.out_path = (dir / "s.csv").string();
  opt.lambda_grid = 5;
  ASSERT_EQ(call("sample", "exNTse", opt).code, kOk);
  const std::string first = read_file(dir / "s.csv");
  ASSERT_EQ(call("sample", "exNTse", opt).code, kOk);
  EXPECT_EQ(read_file(dir / "s.csv"), first);
  std::filesystem::remove_all(dir);
}
