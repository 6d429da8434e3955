/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <random>

#include "bftmc/protocols.hpp"
#include "bftmc/simnet.hpp"

using namespace bftmc;

namespace {

  const Params k411{4, 1, 1};

  Message bv(BinVal v, ProcessId from, Round r = 1) {
    return {MsgKind::bv, r, v, from};
  }
  Message echo(BinVal v, ProcessId from, Round r = 1) {
    return {MsgKind::echo, r, v, from};
  }

  template <class S, class F>
  StepOutput<S> feed(S s, const std::vector<Message> &ms, F handle) {
    StepOutput<S> last{s, {}, {}};
    for (const auto &m : ms) {
      auto out = handle(last.state, m);
      last.state = out.state;
      last.out_msgs.insert(last.out_msgs.end(), out.out_msgs.begin(),
                           out.out_msgs.end());
      last.events.insert(last.events.end(), out.events.begin(),
                         out.events.end());
    }
    return last;
  }

  auto bvh = [](const BvState &s, const Message &m) {
    return bv_handle(s, m, k411);
  };
  auto dh = [](const DbftState &s, const Message &m) {
    return dbft_handle(s, m, k411);
  };

}  // namespace

TEST_CASE("bv_init broadcasts the input") {
  auto a = bv_init(0, BinVal::zero, k411);
  REQUIRE(a.out_msgs.size() == 1);
  CHECK(a.out_msgs[0] == bv(BinVal::zero, 0));
  CHECK(a.state.conts.empty());
  CHECK(a.events.empty());
  auto b = bv_init(1, BinVal::one, k411);
  CHECK(b.out_msgs == std::vector<Message>{bv(BinVal::one, 1)});
  CHECK(a.out_msgs[0] != b.out_msgs[0]);
  CHECK(b.events.empty());
}

TEST_CASE("bv_handle echoes at t+1 and delivers at 2t+1") {
  auto s = bv_init(0, BinVal::zero, k411).state;
  auto one = bv_handle(s, bv(BinVal::one, 1), k411);
  CHECK(one.out_msgs.empty());
  auto two = bv_handle(one.state, bv(BinVal::one, 2), k411);
  CHECK(two.out_msgs == std::vector<Message>{bv(BinVal::one, 0)});
  CHECK(two.events.empty());
  CHECK(two.state.conts.empty());

  auto again = bv_handle(two.state, bv(BinVal::one, 2), k411);
  CHECK(again.out_msgs.empty());
  CHECK(again.events.empty());
  CHECK(again.state == two.state);

  auto z = feed(two.state, {bv(BinVal::zero, 0), bv(BinVal::zero, 2),
                            bv(BinVal::zero, 3)},
                bvh);
  CHECK(z.events == std::vector<Event>{Delivered{BinVal::zero}});
  CHECK(z.state.conts == BinSet{BinVal::zero});
}

TEST_CASE("bv_handle ignores other instances and rejects other kinds") {
  auto s = bv_init(0, BinVal::zero, k411).state;
  auto other = bv_handle(s, bv(BinVal::one, 1, 2), k411);
  CHECK(other.out_msgs.empty());
  CHECK_THROWS(bv_handle(s, echo(BinVal::one, 1), k411));
}

TEST_CASE("dbft_propose") {
  auto a = dbft_propose(0, BinVal::one, k411);
  CHECK(a.state.est == BinVal::one);
  CHECK(a.state.r == 1);
  CHECK(a.out_msgs == std::vector<Message>{bv(BinVal::one, 0)});
  auto b = dbft_propose(1, BinVal::zero, k411);
  CHECK(b.state.est == BinVal::zero);
  CHECK(b.out_msgs == std::vector<Message>{bv(BinVal::zero, 1)});
  CHECK(a.state.ledger.entries().empty());
  CHECK(b.state.ledger.entries().empty());
}

TEST_CASE("dbft: unanimous ECHOs of the parity decide") {
  auto s = dbft_propose(0, BinVal::one, k411).state;
  auto d = feed(s, {bv(BinVal::one, 0), bv(BinVal::one, 1), bv(BinVal::one, 2)},
                dh);
  CHECK(d.state.phase == DbftPhase::echo);
  CHECK(d.state.echoes == BinSet{BinVal::one});
  CHECK(std::count(d.out_msgs.begin(), d.out_msgs.end(), echo(BinVal::one, 0)) ==
        1);
  auto e = feed(d.state,
                {echo(BinVal::one, 0), echo(BinVal::one, 1), echo(BinVal::one, 2)},
                dh);
  CHECK(e.state.decided == Decision{BinVal::one, 1});
  CHECK(e.state.est == BinVal::one);
  CHECK(std::find(e.events.begin(), e.events.end(),
                  Event{Decided{BinVal::one, 1}}) != e.events.end());
  CHECK(e.state.r == 2);
}

TEST_CASE("dbft: mixed ECHOs set the estimate to the round parity") {
  auto s = dbft_propose(0, BinVal::zero, k411).state;
  auto d = feed(s,
                {bv(BinVal::zero, 0), bv(BinVal::zero, 1), bv(BinVal::zero, 2),
                 bv(BinVal::one, 1), bv(BinVal::one, 2), bv(BinVal::one, 3)},
                dh);
  CHECK(d.state.echoes.both());
  auto e = feed(d.state,
                {echo(BinVal::zero, 0), echo(BinVal::zero, 1), echo(BinVal::one, 2)},
                dh);
  CHECK(e.state.est == BinVal::one);
  CHECK_FALSE(e.state.decided);
  CHECK(std::find(e.events.begin(), e.events.end(), Event{RoundAdvanced{2}}) !=
        e.events.end());
}

TEST_CASE("dbft: a process decided in round 1 halts after round 3") {
  // Four correct processes, all proposing 1, delivered in FIFO order.
  Params p{4, 1, 0};
  auto w = simnet::dbft_world(p, {BinVal::one, BinVal::one, BinVal::one,
                                  BinVal::one});
  auto h = simnet::dbft_handler(p);
  while (!w.inflight.empty()) {
    simnet::apply(w, simnet::Deliver{0}, h);
  }
  for (const auto &s : w.machines) {
    CHECK(s.decided == Decision{BinVal::one, 1});
    CHECK(s.halted);
    CHECK(s.r == 3);
    auto out = dbft_handle(s, bv(BinVal::zero, 1, 4), p);
    CHECK(out.out_msgs.empty());
    CHECK(out.events.empty());
  }
}

TEST_CASE("hb_round_outcome") {
  using K = RoundOutcome::Kind;
  CHECK(hb_round_outcome({BinVal::zero, BinVal::one}, BinVal::one) ==
        RoundOutcome{K::estimate, BinVal::one});
  CHECK(hb_round_outcome({BinVal::one}, BinVal::one) ==
        RoundOutcome{K::decide, BinVal::one});
  CHECK(hb_round_outcome({BinVal::zero}, BinVal::one) ==
        RoundOutcome{K::estimate, BinVal::zero});
  CHECK_THROWS(hb_round_outcome({}, BinVal::one));
}

TEST_CASE("property: machine invariants under random schedules") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<BinVal> in;
    for (int i = 0; i < 3; ++i) {
      in.push_back(bin(static_cast<int>(rng() % 2)));
    }
    auto bw = simnet::bv_world(k411, in);
    auto bh = simnet::bv_handler(k411);
    auto dw = simnet::dbft_world(k411, in);
    auto dhh = simnet::dbft_handler(k411);
    auto inject = [&](auto &w, auto &h, Round r) {
      Message m{rng() % 2 ? MsgKind::bv : MsgKind::echo, r,
                bin(static_cast<int>(rng() % 2)), 3};
      auto to = static_cast<ProcessId>(rng() % 3);
      if (!w.injected.contains(
              std::make_tuple(m.kind, m.round, m.value, m.sender, to))) {
        simnet::apply(w, simnet::Inject{m, to}, h);
      }
    };
    for (int step = 0; step < 400; ++step) {
      if (!bw.inflight.empty() || step % 7 == 0) {
        auto before = bw.machines;
        if (step % 7 == 0) {
          Message m{MsgKind::bv, 1, bin(static_cast<int>(rng() % 2)), 3};
          auto to = static_cast<ProcessId>(rng() % 3);
          if (!bw.injected.contains(
                  std::make_tuple(m.kind, m.round, m.value, m.sender, to))) {
            simnet::apply(bw, simnet::Inject{m, to}, bh);
          }
        } else {
          simnet::apply(bw, simnet::Deliver{rng() % bw.inflight.size()}, bh);
        }
        for (std::size_t i = 0; i < 3; ++i) {
          const auto &s = bw.machines[i];
          for (BinVal v : kBinVals) {
            if (s.conts.contains(v)) {
              CHECK(s.ledger.count(MsgKind::bv, 1, v) >= 3);
            }
            if (before[i].broadcast.contains(v)) {
              CHECK(s.broadcast.contains(v));
            }
          }
        }
      }
      if (!dw.inflight.empty()) {
        auto before = dw.machines;
        if (step % 9 == 0) {
          inject(dw, dhh, dw.machines[rng() % 3].r);
        } else {
          simnet::apply(dw, simnet::Deliver{rng() % dw.inflight.size()}, dhh);
        }
        for (std::size_t i = 0; i < 3; ++i) {
          const auto &s = dw.machines[i];
          if (before[i].decided) {
            CHECK(s.decided == before[i].decided);
          }
          if (s.halted) {
            CHECK(s.decided);
          }
          for (BinVal v : kBinVals) {
            if (s.echoes.contains(v) && !s.halted) {
              CHECK(s.ledger.count(MsgKind::bv, s.r, v) >= 3);
            }
          }
        }
      }
    }
  }
}
