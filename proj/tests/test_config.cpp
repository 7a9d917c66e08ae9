#include <gtest/gtest.h>

#include "gafzero/config.hpp"

using namespace gafzero;
using namespace gafzero::config;

TEST(Config, EnsembleLiterals) {
  const auto a = parse_ensemble(json("su2:128"));
  EXPECT_EQ(a.family, Family::SU2);
  EXPECT_EQ(a.N, 128);
  EXPECT_EQ(a.truncation, 128);
  const auto b = resolve_truncation(parse_ensemble(json("bf:16")), 1.0);
  EXPECT_EQ(b.truncation, default_truncation(Family::BargmannFock, 16, 1.0));
  EXPECT_EQ(parse_ensemble(json("su11:8:90")).truncation, 90);
  const auto c = parse_ensemble(json::parse(R"({"family":"su2","N":12})"));
  EXPECT_EQ(c.N, 12);
  EXPECT_THROW(parse_ensemble(json("su3:4")), ConfigError);
  EXPECT_THROW(parse_ensemble(json("su2:x")), ConfigError);
  EXPECT_THROW(parse_ensemble(json("su2:0")), ConfigError);
  EXPECT_THROW(parse_ensemble(json::parse(R"({"family":"su2","N":12,"extra":1})")), ConfigError);
}

TEST(Config, DomainLiterals) {
  const Domain d = parse_domain(json("disk:fs:1.0"));
  EXPECT_NEAR(area(d), kPi / 2, 1e-14);
  const Domain o = parse_domain(json::parse(R"({"shape":"disk","center":[0,0],"radius":1.0,"geometry":"fs"})"));
  EXPECT_NEAR(area(o), kPi / 2, 1e-14);
  const Domain p = parse_domain(json("polygon:flat:0,0;2,0;2,1;0,1"));
  EXPECT_NEAR(area(p), 2.0, 1e-13);
  const Domain a = parse_domain(json("annulus:fs:1:inf"));
  EXPECT_NEAR(area(a), kPi / 2, 1e-14);
  EXPECT_NEAR(area(parse_domain(json("disk:hyperbolic:0.2:0.1:0.1"))), area(Domain::disk({0.1, 0.1}, 0.2, GeometryModel::hyperbolic())), 0.0);
  EXPECT_THROW(parse_domain(json("disk:fs")), ConfigError);
  EXPECT_THROW(parse_domain(json("disk:fs:abc")), ConfigError);
  EXPECT_THROW(parse_domain(json("circle:fs:1")), ConfigError);
  EXPECT_THROW(parse_domain(json("disk:hyp:1.0")), ConfigError);
  EXPECT_THROW(parse_domain(json("polygon:flat:0,0;1,1;1,0;0,1")), ConfigError);
  EXPECT_THROW(parse_domain(json::parse(R"({"shape":"disk","radius":1,"colour":"red"})")), ConfigError);
}

TEST(Config, DomainRoundTrip) {
  for (const char* lit : {"disk:fs:0.5:0.1:-0.2", "annulus:flat:1:2", "polygon:fs:0,0;1,0;0,1"}) {
    const Domain d = parse_domain(json(lit));
    const Domain e = parse_domain(domain_json(d));
    EXPECT_EQ(area(d), area(e)) << lit;
    EXPECT_EQ(boundary_length(d), boundary_length(e)) << lit;
  }
}

TEST(Config, TestFunctionLiterals) {
  const auto f = parse_test_function(json("bump:0.5"), GeometryModel::fubini_study());
  EXPECT_EQ(f.sigma(), 0.5);
  EXPECT_EQ(f.center(), cplx(0.0));
  const auto g = parse_test_function(json("bump:0.2:0.1:0.3:2"), GeometryModel::flat());
  EXPECT_EQ(g.center(), cplx(0.1, 0.3));
  EXPECT_EQ(g.amplitude(), 2.0);
  EXPECT_THROW(parse_test_function(json("bump:-1"), GeometryModel::flat()), ConfigError);
  EXPECT_THROW(parse_test_function(json("box:1"), GeometryModel::flat()), ConfigError);
}

TEST(Config, Numbers) {
  EXPECT_EQ(to_int("100000"), 100000);
  EXPECT_EQ(to_double("inf"), kInf);
  EXPECT_THROW(to_int("1.5"), ConfigError);
  EXPECT_THROW(to_double("1.0x"), ConfigError);
  EXPECT_THROW(check_keys(json::parse(R"({"a":1,"b":2})"), {"a"}, "test"), ConfigError);
}
