#include <doctest.h>

#include <random>

#include "ndopfe/errors.hpp"
#include "ndopfe/params.hpp"

using namespace ndopfe;

TEST_CASE("default set with K_lig = e^11 and L_T = 1 validates") {
  ParameterSet p;
  CHECK(p.K_lig == doctest::Approx(std::exp(11.0)).epsilon(1e-15));
  const ValidationReport rep = validate(p);
  CHECK(rep.ok());
  CHECK(rep.degeneracies.empty());
}

TEST_CASE("alpha = 0 raises the identifiability degeneracy flag") {
  ParameterSet p;
  p.alpha = 0.0;
  const ValidationReport rep = validate(p);
  CHECK(!rep.degeneracies.empty());
  CHECK(rep.degeneracies.front().find("alpha") != std::string::npos);
  CHECK(!rep.ok());  // alpha > 0 is also an invariant
}

TEST_CASE("nu = 1 is legal but flagged degenerate") {
  ParameterSet p;
  p.nu = 1.0;
  const ValidationReport rep = validate(p);
  CHECK(rep.ok());
  REQUIRE(rep.degeneracies.size() == 1);
  CHECK(rep.degeneracies.front().find("nu") != std::string::npos);
}

TEST_CASE("L_T = 0.5 with K_lig = 1 violates the radicand condition") {
  ParameterSet p;
  p.L_T = 0.5;
  p.K_lig = 1.0;
  const ValidationReport rep = validate(p);
  CHECK(!rep.ok());
  bool found = false;
  for (const auto& v : rep.violations) found = found || v.find("1/K_lig") != std::string::npos;
  CHECK(found);
}

TEST_CASE("validate is monotone: adding violations never restores ok") {
  ParameterSet failing;
  failing.alpha = -1.0;
  REQUIRE(!validate(failing).ok());
  const std::size_t before = validate(failing).violations.size();
  failing.K_P = -2.0;
  const ValidationReport rep = validate(failing);
  CHECK(!rep.ok());
  CHECK(rep.violations.size() >= before);
}

TEST_CASE("parse_config maps keys, keeps defaults, rejects bad input") {
  SUBCASE("single override") {
    const ParameterSet p = parse_config("lambda = 0.5");
    CHECK(p.lambda == 0.5);
    CHECK(p.alpha == ParameterSet{}.alpha);
  }
  SUBCASE("empty document gives the full default set") {
    const ParameterSet p = parse_config("");
    const ParameterSet d;
    for (const auto& f : parameter_fields()) CHECK(p.*(f.member) == d.*(f.member));
  }
  SUBCASE("comments and blank lines are ignored") {
    const ParameterSet p = parse_config("# comment\n\nnu = 0.5 ; trailing\n");
    CHECK(p.nu == 0.5);
  }
  SUBCASE("out-of-range value fails validation") {
    CHECK_THROWS_WITH_AS(parse_config("nu = 1.5"), doctest::Contains("nu"), ConfigError);
  }
  SUBCASE("unknown key reports the line") {
    CHECK_THROWS_WITH_AS(parse_config("lambda = 0.5\nbogus = 1"), doctest::Contains("line 2"),
                         ConfigError);
  }
  SUBCASE("unparsable number reports key and line") {
    CHECK_THROWS_WITH_AS(parse_config("alpha = fast"), doctest::Contains("alpha"), ConfigError);
  }
  SUBCASE("duplicate keys are rejected") {
    CHECK_THROWS_WITH_AS(parse_config("b = 1\nb = 2"), doctest::Contains("duplicate"), ConfigError);
  }
}

TEST_CASE("serialize/parse round trip is exact for random valid sets") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ParameterSet p;
    p.lambda = 0.001 + 0.998 * uni(rng);
    p.alpha = 0.01 + 10.0 * uni(rng);
    p.K_P = 0.01 + 2.0 * uni(rng);
    p.K_F = 0.01 + 2.0 * uni(rng);
    p.K_I = 1.0 + 100.0 * uni(rng);
    p.K_W = 0.001 + 0.1 * uni(rng);
    p.b = 2.0 * uni(rng);
    p.nu = 0.01 + 0.99 * uni(rng);
    p.beta = uni(rng);
    p.R_Fe = uni(rng);
    p.tau = 2.0 * uni(rng);
    p.k0 = uni(rng);
    p.Phi = uni(rng);
    p.K_lig = 10.0 + 1e5 * uni(rng);
    p.L_T = 0.5 + 2.0 * uni(rng);
    p.c_p_floor = 1e-6 + 0.1 * uni(rng);
    p.C_p0 = 0.1 + 2.0 * uni(rng);
    p.s_p = 2.0 * uni(rng);
    REQUIRE(validate(p).ok());

    const ParameterSet q = parse_config(serialize(p));
    for (const auto& f : parameter_fields()) CHECK(p.*(f.member) == q.*(f.member));
  }
}

TEST_CASE("identification subsets expose the right parameter lists") {
  IdentificationSubset reduced;
  reduced.mode = SubsetMode::Reduced5;
  const auto r = reduced.optimized_names();
  CHECK(r == std::vector<std::string_view>{"lambda", "alpha", "K_P", "b", "nu"});

  IdentificationSubset full;
  full.mode = SubsetMode::Full7;
  CHECK(full.optimized_names().size() == 7);
}
