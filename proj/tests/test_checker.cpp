/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bftmc/builtin.hpp"
#include "bftmc/checker.hpp"
#include "bftmc/ta_parser.hpp"

using namespace bftmc;
using namespace bftmc::ta;
using check::Verdict;

namespace {

  std::shared_ptr<const ThresholdAutomatonModel> bv() {
    return std::make_shared<const ThresholdAutomatonModel>(builtin_bv());
  }

  std::shared_ptr<const ThresholdAutomatonModel> load(const std::string &name) {
    std::ifstream in(std::string(BFTMC_TEST_DATA) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_shared<const ThresholdAutomatonModel>(
        parse_ta_or_throw(ss.str()));
  }

  // Depth-first closure with an ordered set; shares nothing with reach().
  std::set<Configuration> dfs(const Instance &inst) {
    std::set<Configuration> seen;
    std::vector<Configuration> stack = inst.initial_configurations();
    while (!stack.empty()) {
      auto c = stack.back();
      stack.pop_back();
      if (!seen.insert(c).second) {
        continue;
      }
      for (int r = 0; r < static_cast<int>(inst.model().rules.size()); ++r) {
        auto next = apply_rule(inst, c, r);
        if (auto *n = std::get_if<Configuration>(&next)) {
          stack.push_back(*n);
        }
      }
    }
    return seen;
  }

}  // namespace

TEST_CASE("reach: BV at (4,1,1) has 162 configurations") {
  Instance inst(bv(), {4, 1, 1});
  auto rr = check::reach(inst);
  CHECK(rr.states.size() == 162);
  auto oracle = dfs(inst);
  CHECK(std::set<Configuration>(rr.states.begin(), rr.states.end()) == oracle);
}

TEST_CASE("reach agrees with a DFS oracle on other instances") {
  for (Params p : {Params{5, 1, 1}, Params{4, 1, 0}, Params{7, 2, 1}}) {
    Instance inst(bv(), p);
    auto rr = check::reach(inst);
    CHECK(std::set<Configuration>(rr.states.begin(), rr.states.end()) ==
          dfs(inst));
  }
}

TEST_CASE("reach: a model without rules keeps its initial configurations") {
  auto m = std::make_shared<const ThresholdAutomatonModel>(parse_ta_or_throw(
      "model still; params n t f; locations A B; initial A B;"));
  Instance inst(m, {4, 1, 1});
  auto rr = check::reach(inst);
  CHECK(rr.states.size() == 4);
  CHECK(rr.states.size() == inst.initial_configurations().size());
}

TEST_CASE("reach: unanimous zero input never touches value 1") {
  Instance inst(bv(), {4, 1, 1});
  const auto &m = inst.model();
  auto c = inst.empty_configuration();
  c.values[*m.location_index("locV0")] = 3;
  auto rr = check::reach(inst, {c});
  int b1 = inst.shared_slot(*m.shared_index("b1"));
  for (const auto &s : rr.states) {
    CHECK(s.values[b1] == 0);
    CHECK(s.kappa(*m.location_index("locC1")) == 0);
    CHECK(s.kappa(*m.location_index("locC01")) == 0);
  }
}

TEST_CASE("reach: results do not depend on the worker count") {
  Instance inst(bv(), {7, 2, 2});
  check::Options one;
  check::Options four;
  four.workers = 4;
  auto a = check::reach(inst, one);
  auto b = check::reach(inst, four);
  CHECK(a.states == b.states);
  CHECK(a.parent == b.parent);
  CHECK(a.via_rule == b.via_rule);
}

TEST_CASE("state budget") {
  Instance inst(bv(), {4, 1, 1});
  check::Options small;
  small.state_budget = 10;
  CHECK_THROWS_AS(check::reach(inst, small), check::ResourceError);

  ::setenv("BFTMC_STATE_BUDGET", "123", 1);
  CHECK(check::state_budget_from_env() == 123);
  ::setenv("BFTMC_STATE_BUDGET", "junk", 1);
  CHECK(check::state_budget_from_env() == check::kDefaultStateBudget);
  ::unsetenv("BFTMC_STATE_BUDGET");
  CHECK(check::state_budget_from_env() == check::kDefaultStateBudget);
}

TEST_CASE("BV specs hold at (4,1,1)") {
  Instance inst(bv(), {4, 1, 1});
  for (const auto &s : inst.model().specs) {
    CAPTURE(s.name);
    auto v = check::check_spec(inst, s);
    CHECK(v.holds());
    CHECK_FALSE(v.witness);
  }
}

TEST_CASE("trivial properties") {
  Instance inst(bv(), {4, 1, 1});
  CHECK(check::check_invariant(inst, Prop::truth()).holds());

  SpecFormula vacuous;
  vacuous.name = "vacuous";
  vacuous.kind = SpecFormula::Kind::liveness;
  CHECK(check::check_liveness(inst, vacuous).holds());
}

TEST_CASE("a false invariant yields a shortest replayable trace") {
  Instance inst(bv(), {4, 1, 1});
  const auto &m = inst.model();
  LinearExpr e;
  e.coeffs[Term{TermKind::location, *m.location_index("locC0")}] = 1;
  // locC0 < 1
  e.constant = -1;
  auto p = Prop::of({e, Rel::lt});
  auto v = check::check_invariant(inst, p);
  REQUIRE(v.violated());
  REQUIRE(v.witness);
  const auto &t = std::get<check::Trace>(*v.witness);
  CHECK_FALSE(check::replay_trace(inst, t));
  CHECK(t.last().kappa(*m.location_index("locC0")) == 1);
  // Two broadcasts of 0 plus the faulty one suffice for a delivery.
  CHECK(t.steps.size() == 3);
}

TEST_CASE("removing the echo rules breaks the obligation") {
  Instance inst(load("bv_no_echo.ta"), {4, 1, 1});
  auto v = check::check_spec(inst, *inst.model().spec("obligation0"));
  REQUIRE(v.violated());
  REQUIRE(v.witness);
  REQUIRE(std::holds_alternative<check::Lasso>(*v.witness));
  const auto &l = std::get<check::Lasso>(*v.witness);
  CHECK_FALSE(check::replay_lasso(inst, l));
}

TEST_CASE("replay rejects tampered witnesses") {
  Instance inst(bv(), {4, 1, 1});
  auto init = inst.initial_configurations().front();
  check::Trace t{init, {}};
  CHECK_FALSE(check::replay_trace(inst, t));
  auto bogus = init;
  bogus.values[0] += 1;
  t.steps.push_back({0, bogus});
  CHECK(check::replay_trace(inst, t));
}

TEST_CASE("spec selection") {
  auto m = builtin_bv();
  CHECK(check::select_specs(m, "obligation").size() == 2);
  CHECK(check::select_specs(m, "termination").size() == 1);
  CHECK(check::select_specs(m, "all").size() == m.specs.size());
  CHECK(check::select_specs(m, "nope").empty());
}
