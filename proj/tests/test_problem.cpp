#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "ejecta/bundled.hpp"
#include "ejecta/errors.hpp"
#include "ejecta/problem.hpp"

using namespace ejecta;

namespace {

const char* kMinimal = R"toml([problem]
dim = 1
period = "2pi"
g = "x"
f = "sin(t)"
[window]
lambda = [-0.1, 0.1]
p = [-1, 1]
)toml";

std::string error_of(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST(ParseProblem, MinimalAndDefaults) {
  const ProblemSpec s = parse_problem(kMinimal, "mini");
  EXPECT_EQ(s.id, "mini");
  EXPECT_EQ(s.dim, 1);
  EXPECT_DOUBLE_EQ(s.period, 2.0 * std::numbers::pi);
  EXPECT_EQ(s.g_text, std::vector<std::string>{"x"});
  EXPECT_FALSE(s.separated);
  EXPECT_EQ(s.window.lambda.lo, -0.1);
  EXPECT_EQ(s.window.p[0].hi, 1.0);
  EXPECT_EQ(s.numerics.rk_tol, 1e-10);
  EXPECT_EQ(s.numerics.grid, 400);
  EXPECT_EQ(s.numerics.resonance_eps, 1e-8);
  EXPECT_EQ(s.field.g(Vec{0.5})[0], 0.5);
}

TEST(ParseProblem, FullPlanarFile) {
  const ProblemSpec s = parse_problem(R"toml(# planar example
[problem]
dim = 2
period = 3.5          # plain number
g = ["x^3", "y + x^2"]
f = ["sin(t) + 1", "sin(t) + 1"]
separated = true

[window]
lambda = [-0.2, 0.2]
x = [-1.0, 1.0]
y = [-2, 0.5]

[numerics]
rk_tol = 1e-12
grid = 16
resonance_eps = 1e-7
)toml");
  EXPECT_EQ(s.dim, 2);
  EXPECT_EQ(s.period, 3.5);
  EXPECT_TRUE(s.separated);
  EXPECT_EQ(s.window.p[1].lo, -2.0);
  EXPECT_EQ(s.window.p[1].hi, 0.5);
  EXPECT_EQ(s.numerics.grid, 16);
  EXPECT_EQ(s.numerics.rk_tol, 1e-12);
  EXPECT_EQ(s.numerics.resonance_eps, 1e-7);
  EXPECT_EQ(s.field.g(Vec{1.0, 2.0})[1], 3.0);
}

TEST(ParseProblem, PeriodForms) {
  EXPECT_DOUBLE_EQ(parse_problem(with("\"2pi\"", "\"pi\"")).period, std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_problem(with("\"2pi\"", "\"4*pi/3\"")).period, 4 * std::numbers::pi / 3);
  EXPECT_DOUBLE_EQ(parse_problem(with("\"2pi\"", "6.25")).period, 6.25);
  EXPECT_NE(error_of(with("\"2pi\"", "\"x\"")), "");
  EXPECT_NE(error_of(with("\"2pi\"", "-1")), "");
  EXPECT_NE(error_of(with("\"2pi\"", "\"1/0\"")), "");
}

TEST(ParseProblem, ErrorsCarryLineAndColumn) {
  const std::string e = error_of(with("p = [-1, 1]", "p = [1, -1]"));
  EXPECT_NE(e.find("8:"), std::string::npos) << e;
  EXPECT_NE(e.find("lo < hi"), std::string::npos) << e;

  const std::string unknown = error_of(with("f = \"sin(t)\"", "f = \"sin(t)\"\nshape = 3"));
  EXPECT_NE(unknown.find("6:1"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("unknown key"), std::string::npos) << unknown;

  const std::string dup = error_of(with("f = \"sin(t)\"", "f = \"sin(t)\"\ng = \"x\""));
  EXPECT_NE(dup.find("duplicate"), std::string::npos) << dup;

  const std::string list = error_of(with("lambda = [-0.1, 0.1]", "lambda = [-0.1 0.1]"));
  EXPECT_NE(list.find("problem file 7:"), std::string::npos) << list;
}

TEST(ParseProblem, RejectsInvalidContent) {
  EXPECT_NE(error_of(with("dim = 1", "dim = 3")), "");
  EXPECT_NE(error_of(with("g = \"x\"", "g = \"x +\"")), "");
  EXPECT_NE(error_of(with("g = \"x\"", "g = \"x + y\"")), "");  // y in a scalar problem
  EXPECT_NE(error_of(with("g = \"x\"", "g = [\"x\", \"x\"]")), "");
  EXPECT_NE(error_of(with("[window]", "[windows]")), "");
  EXPECT_NE(error_of(std::string(kMinimal) + "[numerics]\ngrid = 4\n"), "");
  EXPECT_NE(error_of(std::string(kMinimal) + "[numerics]\ngrid = 10.5\n"), "");
  EXPECT_NE(error_of(std::string(kMinimal) + "[numerics]\nrk_tol = 0\n"), "");
  EXPECT_NE(error_of(with("f = \"sin(t)\"\n", "")), "");  // missing key
  EXPECT_NE(error_of("dim = 1\n"), "");                   // key outside of a section
}

TEST(LoadProblem, IdFromStemAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "ejecta_problem_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "mycase.toml";
  std::ofstream(path) << kMinimal;
  EXPECT_EQ(load_problem(path.string()).id, "mycase");
  EXPECT_THROW(load_problem((dir / "absent.toml").string()), InputError);
  std::filesystem::remove_all(dir);
}

TEST(Bundled, FilesMatchEmbeddedTexts) {
  const std::filesystem::path dir = std::filesystem::path(EJECTA_SOURCE_DIR) / "problems";
  ASSERT_EQ(bundled::ids().size(), 8u);
  for (const auto& id : bundled::ids()) {
    std::ifstream f(dir / (id + ".toml"), std::ios::binary);
    ASSERT_TRUE(f) << id;
    std::stringstream s;
    s << f.rdbuf();
    EXPECT_EQ(s.str(), bundled::find(id)->text) << id;
    const ProblemSpec spec = bundled::load(id);
    EXPECT_EQ(spec.id, id);
  }
  EXPECT_EQ(bundled::find("nope"), nullptr);
}

TEST(Bundled, ExamplesAsStated) {
  const ProblemSpec nt = bundled::load("exNTse");
  EXPECT_EQ(nt.window.p[0].lo, -2.0);
  EXPECT_EQ(nt.window.p[0].hi, 1.0);
  EXPECT_EQ(bundled::load("ex3d").dim, 2);
  EXPECT_NEAR(bundled::load("ex2tang").field.g(Vec{2.0})[0], 8.0 * 9.0 * 1.0 / 65.0, 1e-12);
}
