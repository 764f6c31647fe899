#include <doctest.h>

#include "sdosim/adversary.hpp"

using namespace sdosim;

TEST_CASE("strategy names parse both ways") {
  for (StrategyKind k : {StrategyKind::None, StrategyKind::SimpleSelective, StrategyKind::Shrewd}) {
    CHECK(parse_strategy(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_strategy("greedy"), std::invalid_argument);
}

TEST_CASE("targeted patterns") {
  const AdversaryStrategy none{StrategyKind::None, 1.0};
  const AdversaryStrategy simple{StrategyKind::SimpleSelective, 1.0};
  const AdversaryStrategy shrewd{StrategyKind::Shrewd, 1.0};
  for (Pattern p : kPatterns) {
    CHECK_FALSE(none.targets(p));
    CHECK(simple.targets(p) == (classify(p).kind == ClassKind::Other));
  }
  for (Pattern p : {Pattern::HHH, Pattern::HHC, Pattern::CHC, Pattern::CCC, Pattern::HCC}) {
    CHECK_FALSE(shrewd.targets(p));
  }
  for (Pattern p : {Pattern::HCH, Pattern::CHH, Pattern::CCH}) CHECK(shrewd.targets(p));
}

TEST_CASE("d = 1 drops every targeted circuit, d = 0 none") {
  Rng rng(2);
  const AdversaryStrategy full{StrategyKind::SimpleSelective, 1.0};
  const AdversaryStrategy off{StrategyKind::SimpleSelective, 0.0};
  for (int i = 0; i < 1000; ++i) {
    for (Pattern p : kPatterns) {
      CHECK(circuit_survives_adversary(p, full, rng) == (classify(p).kind != ClassKind::Other));
      CHECK(circuit_survives_adversary(p, off, rng));
    }
  }
}

TEST_CASE("partial drop rate is honoured") {
  Rng rng(8);
  const AdversaryStrategy half{StrategyKind::Shrewd, 0.3};
  int survived = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) survived += circuit_survives_adversary(Pattern::CHH, half, rng);
  CHECK(static_cast<double>(survived) / n == doctest::Approx(0.7).epsilon(0.01));
}

TEST_CASE("every decision consumes the same number of draws") {
  const Environment env{0.23};
  for (Pattern p : kPatterns) {
    Rng a(77), b(77), c(77);
    attempt_retrieval(p, {StrategyKind::None, 0.5}, env, a);
    attempt_retrieval(p, {StrategyKind::SimpleSelective, 0.5}, env, b);
    attempt_retrieval(p, {StrategyKind::Shrewd, 1.0}, env, c);
    const auto x = a();
    CHECK(x == b());
    CHECK(x == c());
  }
}

TEST_CASE("network failures are independent of the adversary") {
  Rng rng(3);
  const Environment env{0.23};
  const AdversaryStrategy none{StrategyKind::None, 1.0};
  int ok = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ok += attempt_retrieval(Pattern::HHH, none, env, rng);
  CHECK(static_cast<double>(ok) / n == doctest::Approx(0.77).epsilon(0.01));
  CHECK_THROWS_AS(Environment{1.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS((AdversaryStrategy{StrategyKind::Shrewd, 1.5}.validate()), std::invalid_argument);
}
