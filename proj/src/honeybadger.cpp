/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <random>
#include <stdexcept>

#include "bftmc/scenarios.hpp"

namespace bftmc::scenarios {

  namespace {

    constexpr Params kParams{4, 1, 1};
    constexpr ProcessId kByz = 3;

    using HbWorld = simnet::World<HbState>;

    struct Driver {
      HbWorld w;
      simnet::Handler<HbState> handle;

      void act(const simnet::Action &a) {
        simnet::apply(w, a, handle);
      }

      // Delivers the in-flight message `kind(r, v)` from `from` to `to`.
      void deliver(MsgKind kind, Round r, BinVal v, ProcessId from,
                   ProcessId to) {
        Message m{kind, r, v, from};
        for (std::size_t i = 0; i < w.inflight.size(); ++i) {
          if (w.inflight[i].msg == m && w.inflight[i].dest == to) {
            act(simnet::Deliver{i});
            return;
          }
        }
        throw std::logic_error("scripted message " + to_string(m) + " to p" +
                               std::to_string(to + 1) + " is not in flight");
      }

      void inject(MsgKind kind, Round r, BinVal v, ProcessId to) {
        act(simnet::Inject{Message{kind, r, v, kByz}, to});
      }

      // Messages of rounds <= r that are still in flight.
      void flush(Round r) {
        for (std::size_t i = 0; i < w.inflight.size();) {
          if (w.inflight[i].msg.round <= r) {
            act(simnet::Deliver{i});
          } else {
            ++i;
          }
        }
      }
    };

    std::string pname(ProcessId p) {
      return "p" + std::to_string(p + 1);
    }

    std::string view_text(const HbView &v) {
      return "est " + std::to_string(to_int(v.est_before)) + " conts " +
             v.conts.to_string() + " values " + v.values.to_string() +
             " -> est " + std::to_string(to_int(v.est_after)) +
             (v.decided ? " DECIDED" : "");
    }

    // One round of the strategy; the caller has checked the 2/1 split.
    void play_round(Driver &d, Round r, BinVal c,
                    ProcessId lonely, ProcessId starved, ProcessId partner) {
      const BinVal m = d.w.machines[lonely].est;
      const BinVal o = !m;
      constexpr auto bv = MsgKind::bv;
      constexpr auto aux = MsgKind::echo;

      // The starved process receives nothing until the coin is out.
      d.deliver(bv, r, o, partner, partner);
      d.deliver(bv, r, o, starved, partner);
      d.inject(bv, r, o, partner);            // partner delivers o first
      d.deliver(bv, r, m, lonely, partner);
      d.inject(bv, r, m, partner);            // partner echoes m
      d.deliver(bv, r, m, lonely, lonely);
      d.deliver(bv, r, m, partner, lonely);
      d.inject(bv, r, m, lonely);             // lonely delivers m first
      d.deliver(bv, r, m, partner, partner);  // partner delivers m
      d.deliver(bv, r, o, starved, lonely);
      d.deliver(bv, r, o, partner, lonely);   // lonely echoes o
      d.deliver(bv, r, o, lonely, lonely);    // lonely delivers o

      // Both close the round with values {0,1}.
      d.deliver(aux, r, m, lonely, lonely);
      d.deliver(aux, r, o, partner, lonely);
      d.inject(aux, r, m, lonely);
      d.deliver(aux, r, o, partner, partner);
      d.deliver(aux, r, m, lonely, partner);
      d.inject(aux, r, o, partner);

      // The coin is known; the starved process ends with values {!c}.
      if (c == m) {
        d.deliver(bv, r, o, starved, starved);
        d.deliver(bv, r, o, partner, starved);
        d.inject(bv, r, o, starved);
        d.deliver(aux, r, o, starved, starved);
        d.deliver(aux, r, o, partner, starved);
        d.inject(aux, r, o, starved);
      } else {
        d.deliver(bv, r, m, lonely, starved);
        d.inject(bv, r, m, starved);          // starved echoes m
        d.deliver(bv, r, m, partner, starved);
        d.deliver(aux, r, m, starved, starved);
        d.deliver(aux, r, m, lonely, starved);
        d.inject(aux, r, m, starved);
      }
      d.flush(r);
    }

  }  // namespace

  HbReplay replay_honeybadger(const std::array<BinVal, 3> &inputs,
                              const CoinOracle &coin,
                              Round k) {
    if (std::count(inputs.begin(), inputs.end(), inputs[0]) == 3) {
      throw std::invalid_argument("inputs must contain both values");
    }
    if (k < 1 || coin.size() < k) {
      throw std::invalid_argument("coin sequence must cover rounds 1.." +
                                  std::to_string(k));
    }
    CoinFn coin_fn = [coin](Round r) { return coin(r); };
    Driver d{simnet::hb_world(kParams, {inputs.begin(), inputs.end()}),
             simnet::hb_handler(kParams, coin_fn)};

    HbReplay out;
    auto &rep = out.report;
    rep.scenario = "honeybadger";
    rep.setup["n"] = kParams.n;
    rep.setup["t"] = kParams.t;
    rep.setup["f"] = kParams.f;
    rep.setup["byzantine"] = pname(kByz);
    rep.setup["inputs"] = std::to_string(to_int(inputs[0])) + "," +
                          std::to_string(to_int(inputs[1])) + "," +
                          std::to_string(to_int(inputs[2]));
    rep.setup["coin"] = coin.to_string();
    rep.setup["rounds"] = k;

    bool shape_ok = true;
    bool split_ok = true;
    std::string shape_detail;
    std::string split_detail;

    for (Round r = 1; r <= k; ++r) {
      HbRound hr;
      hr.round = r;
      hr.coin = coin(r);

      std::array<ProcessId, 3> ids{0, 1, 2};
      auto est = [&](ProcessId p) { return d.w.machines[p].est; };
      auto lonely = std::find_if(ids.begin(), ids.end(), [&](ProcessId p) {
        return std::count_if(ids.begin(), ids.end(), [&](ProcessId q) {
                 return est(q) == est(p);
               }) == 1;
      });
      bool ready = lonely != ids.end();
      for (ProcessId p : ids) {
        ready = ready && d.w.machines[p].r == r && !d.w.machines[p].decided;
      }
      if (!ready) {
        shape_ok = false;
        shape_detail = "round " + std::to_string(r) +
                       ": expected one minority estimate among undecided "
                       "processes at round start";
        break;
      }
      hr.lonely = *lonely;
      std::vector<ProcessId> majority;
      for (ProcessId p : ids) {
        if (p != hr.lonely) {
          majority.push_back(p);
        }
      }
      hr.starved = majority[0];
      hr.partner = majority[1];
      for (ProcessId p : ids) {
        hr.procs[p].id = p;
        hr.procs[p].est_before = est(p);
      }

      try {
        play_round(d, r, hr.coin, hr.lonely, hr.starved, hr.partner);
      } catch (const std::exception &ex) {
        shape_ok = false;
        shape_detail = "round " + std::to_string(r) + ": " + ex.what();
        break;
      }

      int both = 0;
      int not_coin = 0;
      for (ProcessId p : ids) {
        const auto &s = d.w.machines[p];
        auto &v = hr.procs[p];
        v.conts = s.last_conts;
        v.values = s.last_values;
        v.est_after = s.est;
        v.decided = s.decided.has_value();
        both += v.values.both();
        not_coin += v.values == BinSet{!hr.coin};
      }
      if (both != 2 || not_coin != 1) {
        split_ok = false;
        if (split_detail.empty()) {
          split_detail = "round " + std::to_string(r) +
                         ": expected two values={0,1} and one values={" +
                         std::to_string(to_int(!hr.coin)) + "}, observed";
          for (const auto &v : hr.procs) {
            split_detail += " " + pname(v.id) + "=" + v.values.to_string();
          }
        }
      }

      ojson o;
      o["round"] = r;
      o["coin"] = to_int(hr.coin);
      o["starved"] = pname(hr.starved);
      for (const auto &v : hr.procs) {
        o[pname(v.id)] = view_text(v);
      }
      rep.observations.push_back(std::move(o));
      out.rounds.push_back(hr);
    }

    for (const auto &e : d.w.log) {
      out.decisions += std::holds_alternative<Decided>(e.event);
    }

    // The recorded schedule must be accepted as is by a fresh network.
    bool replays = true;
    std::string replay_detail;
    try {
      auto fresh = simnet::hb_world(kParams, {inputs.begin(), inputs.end()});
      simnet::run_schedule(fresh, d.w.trail, d.handle);
      replays = fresh.machines == d.w.machines;
      if (!replays) {
        replay_detail = "replayed machines differ from the scripted run";
      }
    } catch (const simnet::ScheduleError &ex) {
      replays = false;
      replay_detail = ex.what();
    }

    rep.claim("every round starts from a 2/1 estimate split", shape_ok,
              shape_detail);
    rep.claim("two processes end each round with values={0,1}, one with "
              "values={not c}",
              split_ok, split_detail);
    rep.claim("no correct process decides", out.decisions == 0,
              std::to_string(out.decisions) + " decide events");
    rep.claim("schedule uses only legal adversary moves", replays,
              replay_detail);
    out.schedule = std::move(d.w.trail);
    return out;
  }

  HbControl hb_fair_control(int seeds, Round bound, std::uint64_t first_seed) {
    constexpr std::size_t kStepCap = 1'000'000;
    HbControl ctl;
    const std::vector<BinVal> inputs{BinVal::zero, BinVal::one, BinVal::one};
    for (int i = 0; i < seeds; ++i) {
      std::uint64_t seed = first_seed + static_cast<std::uint64_t>(i);
      std::mt19937_64 rng(seed);
      // One honest coin flip per round, fixed up front.
      std::vector<BinVal> flips;
      for (Round r = 0; r <= bound + 1; ++r) {
        flips.push_back(bin(static_cast<int>(rng() & 1U)));
      }
      CoinFn coin = [flips](Round r) {
        return flips[std::min<std::size_t>(r, flips.size() - 1)];
      };
      auto w = simnet::hb_world(kParams, inputs);
      auto handle = simnet::hb_handler(kParams, coin);

      auto all_decided = [&] {
        return std::all_of(w.machines.begin(), w.machines.end(),
                           [](const HbState &s) { return s.decided.has_value(); });
      };
      auto too_late = [&] {
        return std::any_of(w.machines.begin(), w.machines.end(),
                           [&](const HbState &s) {
                             return !s.decided && s.r > bound;
                           });
      };

      bool ok = false;
      for (std::size_t step = 0; step < kStepCap; ++step) {
        if (all_decided()) {
          ok = true;
          break;
        }
        if (too_late() || w.inflight.empty()) {
          break;
        }
        if (rng() % 10 == 0) {
          // A Byzantine message for some correct process's current round.
          auto to = static_cast<ProcessId>(rng() % 3);
          Message m{rng() % 2 ? MsgKind::bv : MsgKind::echo,
                    w.machines[to].r, bin(static_cast<int>(rng() % 2)), kByz};
          if (!w.injected.contains(std::make_tuple(m.kind, m.round, m.value,
                                                   m.sender, to))) {
            simnet::apply(w, simnet::Inject{m, to}, handle);
            continue;
          }
        }
        simnet::apply(w, simnet::Deliver{rng() % w.inflight.size()}, handle);
      }

      ++ctl.runs;
      if (ok) {
        ++ctl.decided_runs;
        for (const auto &s : w.machines) {
          ctl.max_decision_round =
              std::max(ctl.max_decision_round, s.decided->round);
        }
      } else {
        ctl.failed_seeds.push_back(seed);
      }
    }
    return ctl;
  }

  ScenarioReport control_report(const HbControl &c, Round bound) {
    ScenarioReport rep;
    rep.scenario = "honeybadger-fair";
    rep.setup["n"] = kParams.n;
    rep.setup["t"] = kParams.t;
    rep.setup["f"] = kParams.f;
    rep.setup["inputs"] = "0,1,1";
    rep.setup["seeds"] = c.runs;
    rep.setup["round_bound"] = bound;
    ojson o;
    o["decided_runs"] = c.decided_runs;
    o["max_decision_round"] = c.max_decision_round;
    rep.observations.push_back(std::move(o));
    std::string failed;
    for (auto s : c.failed_seeds) {
      failed += (failed.empty() ? "seeds " : ",") + std::to_string(s);
    }
    rep.claim("every run decides within " + std::to_string(bound) + " rounds",
              c.failed_seeds.empty() && c.decided_runs == c.runs,
              failed + " did not decide");
    return rep;
  }

}  // namespace bftmc::scenarios
