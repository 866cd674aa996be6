#include "subvar/toml.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace subvar;

TEST(Toml, ScalarsAndTables) {
  const toml::Value v = toml::parse(R"(
name = "run a"   # trailing comment
count = 1_000
x = -2.5e-3
flag = true
[grid]
ts = [ -0.1, 0,
       0.1, ]
[a.b]
"quoted key" = "tab\there"
c.d = +inf
)");
  const toml::Table& t = v.table();
  EXPECT_EQ(t.at("name").str(), "run a");
  EXPECT_EQ(t.at("count").integer(), 1000);
  EXPECT_DOUBLE_EQ(t.at("x").number(), -2.5e-3);
  EXPECT_TRUE(t.at("flag").boolean());
  const toml::Array& ts = t.at("grid").table().at("ts").array();
  ASSERT_EQ(ts.size(), 3u);
  EXPECT_TRUE(ts[1].is_int());
  EXPECT_DOUBLE_EQ(ts[2].number(), 0.1);
  const toml::Table& ab = t.at("a").table().at("b").table();
  EXPECT_EQ(ab.at("quoted key").str(), "tab\there");
  EXPECT_TRUE(std::isinf(ab.at("c").table().at("d").number()));
}

TEST(Toml, NestedArrays) {
  const toml::Value v = toml::parse("v = [[1, 0.5], [0, -1]]\n");
  const toml::Array& rows = v.table().at("v").array();
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[1].array()[1].number(), -1.0);
  EXPECT_STREQ(rows[0].type_name(), "array");
}

TEST(Toml, ErrorsCarryLineNumbers) {
  try {
    toml::parse("a = 1\n\nb = \n");
    FAIL() << "no error";
  } catch (const toml::ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(toml::parse("a = 1\na = 2\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("a = \"open\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("a = 1 2\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("t = {x = 1}\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("[[arr]]\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("a = 1.2.3\n"), toml::ParseError);
}

TEST(Toml, TableRedefinitionOfValueFails) {
  EXPECT_THROW(toml::parse("a = 1\n[a]\nb = 2\n"), toml::ParseError);
}

TEST(Toml, MissingFile) { EXPECT_THROW(toml::parse_file("/nonexistent/x.toml"), std::ios_base::failure); }
