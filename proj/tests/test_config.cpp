#include "subvar/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace subvar;

namespace {

ExperimentConfig from(const std::string& text) { return config_from_toml(toml::parse(text)); }

std::vector<std::string> problems(const std::string& text) {
  try {
    validate(from(text));
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& needle) {
  for (const auto& p : ps)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig c = from("example = \"hopf_s3\"\nsuites = [\"invariants\"]\n");
  EXPECT_EQ(c.spec, "zero");
  EXPECT_EQ(c.ts, (std::vector<double>{-0.2, -0.1, 0.0, 0.1, 0.2}));
  EXPECT_EQ(c.seed, 1u);
  EXPECT_FALSE(c.expect_fail);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, GridFromCount) {
  const ExperimentConfig c = from("example = \"hopf_s3\"\nsuites = [\"invariants\"]\n[grid]\nt_max = 0.4\nt_count = 5\n");
  ASSERT_EQ(c.ts.size(), 5u);
  EXPECT_DOUBLE_EQ(c.ts.front(), -0.4);
  EXPECT_DOUBLE_EQ(c.ts[2], 0.0);
}

TEST(Config, ConstantV) {
  const ExperimentConfig c = from("example = \"hopf_s3\"\nv = [[0.3, -0.2]]\nsuites = [\"invariants\"]\n");
  ASSERT_TRUE(c.constant_v.has_value());
  EXPECT_DOUBLE_EQ((*c.constant_v)(0, 1), -0.2);
  EXPECT_NO_THROW(validate(c));
  EXPECT_TRUE(mentions(problems("example = \"hopf_s3\"\nv = [[1, 2, 3]]\nsuites = [\"invariants\"]\n"), "v:"));
}

TEST(Config, SchemaErrorsAreCollected) {
  try {
    from("example = 3\nsuites = \"invariants\"\nbogus = 1\n[grid]\nts = [\"a\"]\n");
    FAIL() << "accepted";
  } catch (const ConfigError& e) {
    EXPECT_GE(e.problems().size(), 3u);
    EXPECT_TRUE(mentions(e.problems(), "bogus"));
  }
}

TEST(Config, CrossFieldChecks) {
  EXPECT_TRUE(mentions(problems("example = \"nowhere\"\nsuites = [\"invariants\"]\n"), "unknown example"));
  EXPECT_TRUE(mentions(problems("example = \"hopf_s3\"\nspec = \"nope\"\nsuites = [\"invariants\"]\n"), "spec"));
  EXPECT_FALSE(problems("example = \"hopf_s3\"\nsuites = []\n").empty());
  EXPECT_FALSE(problems("example = \"hopf_s3\"\nsuites = [\"invariants\", \"invariants\"]\n").empty());
  EXPECT_FALSE(problems("example = \"hopf_s3\"\nsuites = [\"telepathy\"]\n").empty());
  // contact structures need a circle fiber
  EXPECT_FALSE(problems("example = \"hopf_s7\"\nsuites = [\"contact\"]\n").empty());
  // derivatives need a symmetric grid
  EXPECT_FALSE(problems("example = \"hopf_s3\"\nsuites = [\"derivatives\"]\n[grid]\nts = [0.0, 0.1]\n").empty());
  EXPECT_FALSE(problems("example = \"hopf_s3\"\nsuites = [\"3-sasaki\"]\n").empty());
  EXPECT_FALSE(problems("example = \"hopf_s3\"\nsuites = [\"positivity-sweep\"]\n").empty());
}

TEST(Config, ParseErrorBecomesConfigError) {
  const auto path = std::filesystem::temp_directory_path() / "subvar_bad_config.toml";
  {
    std::ofstream out(path);
    out << "example = \n";
  }
  EXPECT_THROW(load_config(path.string()), ConfigError);
  std::filesystem::remove(path);
}

TEST(Config, ShippedConfigsLoad) {
  int seen = 0;
  for (const auto& e : std::filesystem::directory_iterator(SUBVAR_SOURCE_DIR "/configs")) {
    if (e.path().extension() != ".toml") continue;
    ++seen;
    SCOPED_TRACE(e.path().string());
    EXPECT_NO_THROW(validate(load_config(e.path().string())));
  }
  EXPECT_GE(seen, 5);
}

TEST(Config, ToleranceScale) {
  Tolerances t;
  t.scale(10.0);
  EXPECT_DOUBLE_EQ(t.derivative, 1e-2);
  EXPECT_DOUBLE_EQ(t.algebraic, 1e-8);
}
