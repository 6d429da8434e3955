/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bftmc/scenarios.hpp"

using namespace bftmc;
using namespace bftmc::scenarios;

namespace {

  constexpr BinVal O = BinVal::zero;
  constexpr BinVal I = BinVal::one;

  // Compares against tests/golden/<name>; rewrites it when
  // BFTMC_UPDATE_GOLDEN is set.
  void golden(const std::string &name, const std::string &actual) {
    std::string path = std::string(BFTMC_GOLDEN) + "/" + name;
    if (std::getenv("BFTMC_UPDATE_GOLDEN") != nullptr) {
      std::ofstream(path) << actual;
    }
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing golden " << path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == actual);
  }

  Link link(Checkpoint s, Checkpoint t) {
    return {s, t};
  }

  VoteAssignment votes(int from, int to, Link l) {
    VoteAssignment v;
    for (int i = from; i < to; ++i) {
      v[i] = l;
    }
    return v;
  }

}  // namespace

TEST_CASE("coin oracle") {
  auto c = CoinOracle::parse("1,0,1");
  CHECK(c.size() == 3);
  CHECK(c(1) == I);
  CHECK(c(2) == O);
  CHECK(c.to_string() == "1,0,1");
  CHECK_THROWS_AS(c(4), std::out_of_range);
  CHECK_THROWS_AS(CoinOracle::parse("1,2"), std::invalid_argument);
  CHECK_THROWS_AS(CoinOracle::parse(""), std::invalid_argument);
  CHECK(CoinOracle::alternating(4).to_string() == "1,0,1,0");
}

TEST_CASE("one round with coin 1") {
  auto r = replay_honeybadger({O, I, I}, CoinOracle::parse("1"), 1);
  CHECK(r.report.passed());
  REQUIRE(r.rounds.size() == 1);
  const auto &x = r.rounds[0];
  CHECK(x.lonely == 0);
  CHECK(x.starved == 1);
  CHECK(x.partner == 2);
  CHECK(x.procs[0].values.both());
  CHECK(x.procs[2].values.both());
  CHECK(x.procs[1].values == BinSet{O});
  CHECK(x.procs[0].est_after == I);
  CHECK(x.procs[1].est_after == O);
  CHECK(x.procs[2].est_after == I);
  CHECK(r.decisions == 0);
}

TEST_CASE("one round with coin 0") {
  auto r = replay_honeybadger({O, I, I}, CoinOracle::parse("0"), 1);
  CHECK(r.report.passed());
  const auto &x = r.rounds.at(0);
  CHECK(x.procs[0].values.both());
  CHECK(x.procs[2].values.both());
  CHECK(x.procs[1].values == BinSet{I});
  CHECK(x.procs[0].est_after == O);
  CHECK(x.procs[1].est_after == I);
  CHECK(x.procs[2].est_after == O);
}

TEST_CASE("ten rounds without a decision, for any coin sequence") {
  for (const char *coin : {"1,0,1,0,1,0,1,0,1,0", "1,1,1,1,1,1,1,1,1,1",
                           "0,0,1,1,0,1,0,0,0,1"}) {
    CAPTURE(coin);
    auto r = replay_honeybadger({O, I, I}, CoinOracle::parse(coin), 10);
    CHECK(r.report.passed());
    CHECK(r.decisions == 0);
    REQUIRE(r.rounds.size() == 10);
    for (const auto &x : r.rounds) {
      int both = 0;
      int neg = 0;
      for (const auto &p : x.procs) {
        CHECK_FALSE(p.decided);
        both += p.values.both() ? 1 : 0;
        neg += p.values == BinSet{!x.coin} ? 1 : 0;
      }
      CHECK(both == 2);
      CHECK(neg == 1);
    }
  }
}

TEST_CASE("the replayed schedule is legal on fresh machines") {
  auto r = replay_honeybadger({I, O, O}, CoinOracle::alternating(3), 3);
  CHECK(r.report.passed());
  Params p{4, 1, 1};
  auto coin = CoinOracle::alternating(3);
  auto w = simnet::hb_world(p, {I, O, O});
  CHECK_NOTHROW(simnet::run_schedule(w, r.schedule,
                                     simnet::hb_handler(p, coin)));
  for (const auto &m : w.machines) {
    CHECK_FALSE(m.decided);
  }
}

TEST_CASE("replay rejects unanimous inputs and short coins") {
  CHECK_THROWS(replay_honeybadger({I, I, I}, CoinOracle::alternating(2), 2));
  CHECK_THROWS(replay_honeybadger({O, I, I}, CoinOracle::alternating(2), 3));
}

TEST_CASE("golden report for ten rounds") {
  auto r = replay_honeybadger({O, I, I}, CoinOracle::alternating(10), 10);
  auto text = to_json(r.report).dump(2) + "\n";
  golden("honeybadger_k10.json", text);
  // Two runs agree byte for byte.
  auto again = replay_honeybadger({O, I, I}, CoinOracle::alternating(10), 10);
  CHECK(to_json(again.report).dump(2) + "\n" == text);
}

TEST_CASE("fair scheduler control decides") {
  auto c = hb_fair_control(100, 20);
  CHECK(c.runs == 100);
  CHECK(c.decided_runs == 100);
  CHECK(c.failed_seeds.empty());
  CHECK(c.max_decision_round <= 20);
  CHECK(control_report(c, 20).passed());
}

TEST_CASE("casper_step justification") {
  CheckpointTree t(9);
  CHECK(t.supermajority() == 7);
  CHECK(t.is_justified(kGenesis));

  Checkpoint a{1, 0};
  Checkpoint b{1, 1};
  Checkpoint c{1, 2};
  auto all = casper_step(t, votes(0, 9, link(kGenesis, a)));
  CHECK(all.is_justified(a));
  CHECK(all.highest_justified() == a);

  VoteAssignment split = votes(0, 3, link(kGenesis, a));
  split.merge(votes(3, 6, link(kGenesis, b)));
  split.merge(votes(6, 9, link(kGenesis, c)));
  auto s = casper_step(t, split);
  CHECK(s.justified().size() == 1);
  CHECK(s.height() == 1);

  VoteAssignment six = votes(0, 6, link(kGenesis, a));
  six.merge(votes(6, 9, link(kGenesis, b)));
  CHECK(casper_step(t, six).justified().size() == 1);
}

TEST_CASE("casper_step rejects illegal votes") {
  CheckpointTree t(9);
  Checkpoint a{1, 0};
  auto once = casper_step(t, votes(0, 1, link(kGenesis, a)));
  CHECK_THROWS_AS(casper_step(once, votes(0, 1, link(kGenesis, {1, 1}))),
                  std::invalid_argument);
  CHECK_THROWS_AS(casper_step(t, votes(9, 10, link(kGenesis, a))),
                  std::invalid_argument);
  CHECK_THROWS_AS(casper_step(t, votes(0, 1, link(a, {2, 0}))),
                  std::invalid_argument);
  CHECK_THROWS_AS(casper_step(t, votes(0, 1, link(kGenesis, kGenesis))),
                  std::invalid_argument);
}

TEST_CASE("casper replay never justifies beyond genesis") {
  auto r = replay_casper(9, 20);
  CHECK(r.passed());
  golden("casper_n9_k20.json", to_json(r).dump(2) + "\n");

  auto small = replay_casper(3, 1);
  CHECK(small.passed());
  CHECK_THROWS(replay_casper(4, 1));
  CHECK_THROWS(replay_casper(9, 0));
}

TEST_CASE("report text form") {
  ScenarioReport r;
  r.scenario = "demo";
  r.setup["n"] = 4;
  r.claim("fine", true);
  r.claim("broken", false, "expected 1, got 2");
  auto text = to_text(r);
  CHECK(text.find("PASS fine") != std::string::npos);
  CHECK(text.find("FAIL broken: expected 1, got 2") != std::string::npos);
  CHECK_FALSE(r.passed());
  auto j = to_json(r);
  CHECK(j["schema"] == "bftmc-scenario/1");
  CHECK(j["passed"] == false);
}
