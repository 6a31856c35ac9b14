#include <gtest/gtest.h>

#include <sstream>

#include "nicis/io.hpp"

using namespace nicis;
using namespace nicis::io;

TEST(Csv, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv_field(""), "");
}

TEST(Csv, RowsEndWithCrLf) {
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"k", "v"});
  w.row({"1", "x,y"});
  EXPECT_EQ(os.str(), "k,v\r\n1,\"x,y\"\r\n");
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3, 6.02e23, -2.5e-300}) EXPECT_EQ(std::stod(num(v)), v);
}

TEST(Hash, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(Config, SeedIsMandatory) {
  EXPECT_THROW(parse_config("{\"alpha\": \"golden\"}"), ConfigError);
  EXPECT_THROW(parse_config("{\"seed\": -3}"), ConfigError);
  EXPECT_THROW(parse_config("{\"seed\": \"7\"}"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config("{\"seed\": "), ConfigError);
}

TEST(Config, CommentsAreAccepted) {
  const auto j = parse_config("// run settings\n{\n  \"seed\": 7, /* fixed */\n  \"skew\": {\"alpha\": \"golden\"}\n}\n");
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 7u);
  EXPECT_EQ(j["skew"]["alpha"], "golden");
}

TEST(Config, HashIgnoresKeyOrder) {
  EXPECT_EQ(config_hash(Json::parse("{\"b\": 1, \"a\": [1, 2]}")), config_hash(Json::parse("{\"a\": [1, 2], \"b\": 1}")));
  EXPECT_NE(config_hash(Json::parse("{\"a\": 1}")), config_hash(Json::parse("{\"a\": 2}")));
}

TEST(Json, KeysAreSorted) { EXPECT_EQ(Json::parse("{\"z\": 1, \"a\": 2, \"m\": 3}").dump(), "{\"a\":2,\"m\":3,\"z\":1}"); }

TEST(Json, PhiSeriesRoundTrip) {
  const auto phi = build_phi(cf_expand("golden", 30), 5);
  const Json j = to_json(phi);
  const auto back = phi_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.qs(), phi.qs());
  EXPECT_EQ(back.coeffs(), phi.coeffs());
  for (double x : {0.0, 0.2, 0.77}) EXPECT_EQ(back.eval(x), phi.eval(x));
}

TEST(Json, PhiSeriesRejectsInconsistentInput) {
  EXPECT_THROW(phi_from_json(Json::parse("{\"alpha_spec\": \"golden\", \"qs\": [\"2\"], \"n_terms\": 3}")), ConfigError);
  EXPECT_THROW(phi_from_json(Json::parse("{\"qs\": []}")), ConfigError);
}

TEST(Csv, ConvergentTable) {
  std::ostringstream os;
  write_convergents_csv(os, cf_expand("sqrt2-1", 3));
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find("\r\n")), "k,a_k,p_k,q_k");
  EXPECT_NE(s.find("1,2,1,2\r\n"), std::string::npos);
  EXPECT_NE(s.find("2,2,2,5\r\n"), std::string::npos);
}
