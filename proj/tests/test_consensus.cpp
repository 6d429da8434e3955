/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include "bftmc/builtin.hpp"
#include "bftmc/consensus.hpp"

using namespace bftmc;
using namespace bftmc::consensus;
using Kind = check::Verdict::Kind;

namespace {

  const RoundModelFactory kDbft = [](BinVal par) {
    return ta::builtin_dbft_round(par);
  };

}  // namespace

TEST_CASE("safety holds for three rounds at (4,1,1)") {
  for (const char *prop : {"agreement", "validity0", "validity1"}) {
    CAPTURE(prop);
    auto r = check_consensus(kDbft, {4, 1, 1}, 3, prop);
    CHECK(r.kind == Kind::holds);
    CHECK_FALSE(r.witness);
  }
}

TEST_CASE("termination without faults") {
  Options o;
  o.termination_inputs = Inputs::all_one;
  auto r = check_consensus(kDbft, {4, 1, 0}, 1, "termination", o);
  CHECK(r.kind == Kind::holds);

  auto two = check_consensus(kDbft, {4, 1, 0}, 2, "termination");
  CHECK(two.kind == Kind::holds);
}

TEST_CASE("termination is unknown when the bound is too small") {
  auto r = check_consensus(kDbft, {4, 1, 0}, 1, "termination");
  CHECK(r.kind == Kind::unknown_at_bound);
}

TEST_CASE("agreement breaks when n = 3t") {
  Options o;
  o.allow_unsafe = true;
  auto r = check_consensus(kDbft, {3, 1, 1}, 2, "agreement", o);
  REQUIRE(r.kind == Kind::violated);
  REQUIRE(r.witness);
  CHECK(r.witness->rounds.size() == 2);
  CHECK(r.witness->rounds[0].parity == BinVal::one);
  CHECK(r.witness->rounds[1].parity == BinVal::zero);
  CHECK_FALSE(replay_consensus(kDbft, {3, 1, 1}, *r.witness, true));

  auto broken = *r.witness;
  broken.rounds[1].trace.initial.values[0] += 1;
  CHECK(replay_consensus(kDbft, {3, 1, 1}, broken, true));
}

TEST_CASE("unsafe parameters are refused by default") {
  CHECK_THROWS_AS(check_consensus(kDbft, {3, 1, 1}, 2, "agreement"),
                  std::invalid_argument);
}

TEST_CASE("barrier moves exits to the next round's starts") {
  auto rp = make_round_product(ta::builtin_dbft_round(BinVal::one));
  ta::Configuration end{std::vector<int>(rp.model->locations.size() +
                                             rp.model->shared.size(),
                                         0)};
  auto put = [&](int loc, int k) {
    end.values[static_cast<std::size_t>(loc)] = k;
  };
  put(rp.loc(Tag::undecided, rp.decided[1]), 1);
  put(rp.loc(Tag::undecided, rp.next_est[0]), 1);
  put(rp.loc(Tag::decided1, rp.next_est[1]), 1);
  put(rp.loc(Tag::decided2, rp.decided[1]), 1);
  // Shared counters are reset.
  end.values[rp.model->locations.size()] = 4;
  CHECK(at_barrier(rp, end));

  auto [next, bits] = barrier(rp, end, {});
  CHECK(bits.decided[1]);
  CHECK_FALSE(bits.decided[0]);
  CHECK(next.kappa(rp.loc(Tag::decided1, rp.start[1])) == 1);
  CHECK(next.kappa(rp.loc(Tag::undecided, rp.start[0])) == 1);
  CHECK(next.kappa(rp.loc(Tag::decided2, rp.start[1])) == 1);
  CHECK(next.kappa(rp.halted) == 1);
  CHECK(next.values[rp.model->locations.size()] == 0);

  int total = 0;
  for (int l = 0; l < static_cast<int>(rp.model->locations.size()); ++l) {
    total += next.kappa(l);
  }
  CHECK(total == 4);

  auto mid = end;
  mid.values[static_cast<std::size_t>(rp.loc(Tag::undecided, rp.start[0]))] = 1;
  CHECK_FALSE(at_barrier(rp, mid));
}

TEST_CASE("check_consensus_all reports every property") {
  auto rs = check_consensus_all(kDbft, {4, 1, 1}, 1);
  REQUIRE(rs.size() == kProperties.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(rs[i].property == kProperties[i]);
  }
}
