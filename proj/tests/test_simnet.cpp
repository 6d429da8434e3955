/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <random>

#include "bftmc/simnet.hpp"

using namespace bftmc;
using namespace bftmc::simnet;

namespace {

  const Params k411{4, 1, 1};
  constexpr BinVal O = BinVal::zero;
  constexpr BinVal I = BinVal::one;

  template <class S>
  void deliver(World<S> &w, const Handler<S> &h, BinVal v, ProcessId from,
               ProcessId to) {
    for (std::size_t i = 0; i < w.inflight.size(); ++i) {
      const auto &e = w.inflight[i];
      if (e.msg.value == v && e.msg.sender == from && e.dest == to) {
        apply(w, Deliver{i}, h);
        return;
      }
    }
    FAIL("no such message in flight");
  }

  // p2 (id 1) is starved while p1 and p3 collect both values.
  World<BvState> scripted() {
    auto w = bv_world(k411, {O, I, I});
    auto h = bv_handler(k411);
    apply(w, Inject{{MsgKind::bv, 1, O, 3}, 0}, h);
    apply(w, Inject{{MsgKind::bv, 1, O, 3}, 2}, h);
    deliver(w, h, O, 0, 2);  // p3 echoes 0
    deliver(w, h, O, 0, 0);
    deliver(w, h, O, 2, 0);  // p1 delivers 0
    deliver(w, h, I, 1, 0);
    deliver(w, h, I, 2, 0);  // p1 echoes 1
    deliver(w, h, I, 0, 0);  // p1 delivers 1
    deliver(w, h, I, 1, 2);
    deliver(w, h, I, 2, 2);
    deliver(w, h, I, 0, 2);  // p3 delivers 1
    deliver(w, h, O, 2, 2);  // p3 delivers 0
    return w;
  }

}  // namespace

TEST_CASE("scripted schedule: two processes deliver both values") {
  auto w = scripted();
  CHECK(w.machines[0].conts.both());
  CHECK(w.machines[2].conts.both());
  CHECK(w.machines[1].conts.empty());
  int delivered = 0;
  for (const auto &e : w.log) {
    delivered += std::holds_alternative<Delivered>(e.event) ? 1 : 0;
  }
  CHECK(delivered == 4);
}

TEST_CASE("determinism: replaying the trail gives identical logs") {
  auto w = scripted();
  auto again = bv_world(k411, {O, I, I});
  run_schedule(again, w.trail, bv_handler(k411));
  CHECK(again.log == w.log);
  CHECK(again.machines == w.machines);
  CHECK(again.inflight == w.inflight);
}

TEST_CASE("empty schedule leaves the world unchanged") {
  auto w = bv_world(k411, {O, I, I});
  auto before = w;
  run_schedule(w, {}, bv_handler(k411));
  CHECK(w.machines == before.machines);
  CHECK(w.inflight == before.inflight);
  CHECK(w.log == before.log);
  CHECK(w.steps == 0);
}

TEST_CASE("fair schedule with unanimous zero inputs") {
  Params p{4, 1, 0};
  auto w = bv_world(p, {O, O, O, O});
  auto h = bv_handler(p);
  std::mt19937 rng(3);
  while (!w.inflight.empty()) {
    apply(w, Deliver{rng() % w.inflight.size()}, h);
  }
  for (const auto &m : w.machines) {
    CHECK(m.conts == BinSet{O});
  }
}

TEST_CASE("reliable channels: delivering everything empties inflight") {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    std::mt19937 rng(seed);
    std::vector<BinVal> in{bin(static_cast<int>(rng() % 2)),
                           bin(static_cast<int>(rng() % 2)),
                           bin(static_cast<int>(rng() % 2))};
    auto w = dbft_world(k411, in);
    auto h = dbft_handler(k411);
    std::size_t guard = 0;
    while (!w.inflight.empty() && guard++ < 200000) {
      apply(w, Deliver{rng() % w.inflight.size()}, h);
    }
    CHECK(w.inflight.empty());
  }
}

TEST_CASE("illegal actions") {
  auto w = bv_world(k411, {O, I, I});
  auto h = bv_handler(k411);
  CHECK_THROWS_AS(apply(w, Deliver{99}, h), ScheduleError);
  CHECK_THROWS_AS(apply(w, Inject{{MsgKind::bv, 1, O, 0}, 1}, h), ScheduleError);
  CHECK_THROWS_AS(apply(w, Inject{{MsgKind::bv, 1, O, 3}, 3}, h), ScheduleError);
  apply(w, Inject{{MsgKind::bv, 1, O, 3}, 1}, h);
  CHECK_THROWS_AS(apply(w, Inject{{MsgKind::bv, 1, O, 3}, 1}, h), ScheduleError);

  Schedule s{Stutter{}, Deliver{0}, Deliver{1000}};
  auto fresh = bv_world(k411, {O, I, I});
  try {
    run_schedule(fresh, s, h);
    FAIL("expected a schedule error");
  } catch (const ScheduleError &e) {
    CHECK(e.step() == 2);
  }

  auto none = bv_world({4, 1, 0}, {O, I, I, I});
  CHECK_THROWS_AS(apply(none, Inject{{MsgKind::bv, 1, O, 3}, 0},
                        bv_handler({4, 1, 0})),
                  ScheduleError);
}

TEST_CASE("schedule JSON round-trip") {
  auto w = scripted();
  Schedule s = w.trail;
  s.push_back(Stutter{});
  auto j = to_json(s);
  CHECK(schedule_from_json(j) == s);
  CHECK(schedule_from_json(nlohmann::json::parse(j.dump())) == s);
  CHECK_THROWS(schedule_from_json(nlohmann::json::parse(R"([{"action":"fly"}])")));
}

TEST_CASE("explore: a single process delivers its own value") {
  Params p{1, 0, 0};
  auto w = bv_world(p, {O});
  auto h = bv_handler(p);
  auto r = explore_exhaustive<BvState>(
      w, h, bv_alphabet(p), [](const BvState &s) { return encode(s); }, 1000);
  REQUIRE(r.quiescent.size() == 1);
  CHECK(r.quiescent[0].machines[0].conts == BinSet{O});
}

TEST_CASE("explore: cap is enforced") {
  auto w = bv_world(k411, {O, I, I});
  CHECK_THROWS_AS(explore_exhaustive<BvState>(
                      w, bv_handler(k411), bv_alphabet(k411),
                      [](const BvState &s) { return encode(s); }, 100),
                  ResourceError);
}

TEST_CASE("explore: quiescent states at (4,1,1) with inputs (0,1,1)") {
  auto w = bv_world(k411, {O, I, I});
  auto h = bv_handler(k411);
  auto r = explore_exhaustive<BvState>(
      w, h, bv_alphabet(k411), [](const BvState &s) { return encode(s); },
      5'000'000);
  bool all_both = false;
  for (const auto &q : r.quiescent) {
    CHECK(q.inflight.empty());
    bool both = true;
    for (const auto &m : q.machines) {
      // Termination and uniformity at quiescence.
      CHECK_FALSE(m.conts.empty());
      both = both && m.conts.both();
      CHECK(m.conts == q.machines[0].conts);
    }
    all_both = all_both || both;
  }
  CHECK(all_both);
}
