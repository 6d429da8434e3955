/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/protocols.hpp"

#include <sstream>

namespace bftmc {

  namespace {

    template <class... Ts>
    struct overloaded : Ts... {
      using Ts::operator()...;
    };
    template <class... Ts>
    overloaded(Ts...) -> overloaded<Ts...>;

    Message make(MsgKind kind, Round r, BinVal v, ProcessId self) {
      return Message{kind, r, v, self};
    }

    // Echo rule: rebroadcast any value seen from t+1 distinct senders.
    template <class State>
    void relay(StepOutput<State> &out,
               BinSet &sent,
               Round r,
               const Thresholds &th) {
      for (auto w : kBinVals) {
        if (!sent.contains(w)
            && out.state.ledger.count(MsgKind::bv, r, w) >= th.weak) {
          sent.insert(w);
          out.out_msgs.push_back(make(MsgKind::bv, r, w, out.state.self));
        }
      }
    }

  }  // namespace

  std::string to_string(const Event &e) {
    return std::visit(
        overloaded{
            [](const Delivered &d) {
              return "Delivered(" + std::to_string(to_int(d.value)) + ")";
            },
            [](const Decided &d) {
              return "Decided(" + std::to_string(to_int(d.value)) + ","
                  + std::to_string(d.round) + ")";
            },
            [](const RoundAdvanced &a) {
              return "RoundAdvanced(" + std::to_string(a.round) + ")";
            }},
        e);
  }

  StepOutput<BvState> bv_init(ProcessId self,
                              BinVal v,
                              const Params &p,
                              Round round) {
    StepOutput<BvState> out;
    out.state.self = self;
    out.state.round = round;
    out.state.broadcast.insert(v);
    check_message(make(MsgKind::bv, round, v, self), p);
    out.out_msgs.push_back(make(MsgKind::bv, round, v, self));
    return out;
  }

  StepOutput<BvState> bv_handle(const BvState &s,
                                const Message &m,
                                const Params &p) {
    if (m.kind != MsgKind::bv) {
      throw std::invalid_argument("bv_handle expects a BV message");
    }
    check_message(m, p);
    StepOutput<BvState> out{s, {}, {}};
    if (m.round != s.round) {
      return out;
    }
    auto th = thresholds(p);
    int count = out.state.ledger.record(m);
    if (count >= th.weak && !out.state.broadcast.contains(m.value)) {
      out.state.broadcast.insert(m.value);
      out.out_msgs.push_back(make(MsgKind::bv, s.round, m.value, s.self));
    }
    if (count >= th.majority && !out.state.conts.contains(m.value)) {
      out.state.conts.insert(m.value);
      out.events.emplace_back(Delivered{m.value});
    }
    return out;
  }

  // -------------------------------------------------------------------------

  namespace {

    void enter_round(StepOutput<DbftState> &out, Round r) {
      auto &st = out.state;
      st.r = r;
      st.phase = DbftPhase::bv;
      st.echoes = {};
      st.bv_sent = {};
      st.bv_sent.insert(st.est);
      out.out_msgs.push_back(make(MsgKind::bv, r, st.est, st.self));
    }

    void dbft_progress(StepOutput<DbftState> &out, const Params &p) {
      auto th = thresholds(p);
      auto &st = out.state;
      while (!st.halted) {
        relay(out, st.bv_sent, st.r, th);

        if (st.phase == DbftPhase::bv) {
          for (auto w : kBinVals) {
            if (st.ledger.count(MsgKind::bv, st.r, w) >= th.majority) {
              out.out_msgs.push_back(make(MsgKind::echo, st.r, w, st.self));
              st.phase = DbftPhase::echo;
              break;
            }
          }
          if (st.phase == DbftPhase::bv) {
            return;
          }
        }

        st.echoes = {};
        for (auto w : kBinVals) {
          if (st.ledger.count(MsgKind::bv, st.r, w) >= th.majority) {
            st.echoes.insert(w);
          }
        }

        bool done = false;
        for (auto w : kBinVals) {
          if (st.echoes.contains(w)
              && st.ledger.count(MsgKind::echo, st.r, w) >= th.quorum) {
            st.est = w;
            if (w == parity(st.r) && !st.decided) {
              st.decided = Decision{w, st.r};
              out.events.emplace_back(Decided{w, st.r});
            }
            done = true;
            break;
          }
        }
        if (!done && st.echoes.both()
            && st.ledger.count_any(MsgKind::echo, st.r) >= th.quorum) {
          st.est = parity(st.r);
          done = true;
        }
        if (!done) {
          return;
        }

        if (st.decided && st.decided->round + 2 == st.r) {
          st.halted = true;
          return;
        }
        out.events.emplace_back(RoundAdvanced{st.r + 1});
        enter_round(out, st.r + 1);
      }
    }

  }  // namespace

  StepOutput<DbftState> dbft_propose(ProcessId self,
                                     BinVal v,
                                     const Params &p) {
    StepOutput<DbftState> out;
    out.state.self = self;
    out.state.est = v;
    check_message(make(MsgKind::bv, 1, v, self), p);
    enter_round(out, 1);
    return out;
  }

  StepOutput<DbftState> dbft_handle(const DbftState &s,
                                    const Message &m,
                                    const Params &p) {
    StepOutput<DbftState> out{s, {}, {}};
    if (s.halted) {
      return out;
    }
    check_message(m, p);
    out.state.ledger.record(m);
    dbft_progress(out, p);
    return out;
  }

  // -------------------------------------------------------------------------

  RoundOutcome hb_round_outcome(BinSet values, BinVal coin) {
    if (values.empty()) {
      throw std::invalid_argument("hb_round_outcome: empty values set");
    }
    if (values.both()) {
      return {RoundOutcome::Kind::estimate, coin};
    }
    if (values.only() == coin) {
      return {RoundOutcome::Kind::decide, coin};
    }
    return {RoundOutcome::Kind::estimate, values.only()};
  }

  namespace {

    void hb_enter_round(StepOutput<HbState> &out, Round r) {
      auto &st = out.state;
      st.r = r;
      st.bv_sent = {};
      st.conts = {};
      st.aux_sent = false;
      st.bv_sent.insert(st.est);
      out.out_msgs.push_back(make(MsgKind::bv, r, st.est, st.self));
    }

    void hb_progress(StepOutput<HbState> &out,
                     const Params &p,
                     const CoinFn &coin) {
      auto th = thresholds(p);
      auto &st = out.state;
      for (;;) {
        relay(out, st.bv_sent, st.r, th);
        for (auto w : kBinVals) {
          if (!st.conts.contains(w)
              && st.ledger.count(MsgKind::bv, st.r, w) >= th.majority) {
            st.conts.insert(w);
            out.events.emplace_back(Delivered{w});
            if (!st.aux_sent) {
              st.aux_sent = true;
              out.out_msgs.push_back(make(MsgKind::echo, st.r, w, st.self));
            }
          }
        }
        if (!st.aux_sent) {
          return;
        }
        std::uint64_t senders = 0;
        BinSet values;
        for (auto w : kBinVals) {
          if (st.conts.contains(w)) {
            auto s = st.ledger.senders(MsgKind::echo, st.r, w);
            senders |= s;
            if (s != 0) {
              values.insert(w);
            }
          }
        }
        if (std::popcount(senders) < th.quorum) {
          return;
        }
        auto outcome = hb_round_outcome(values, coin(st.r));
        st.last_conts = st.conts;
        st.last_values = values;
        st.est = outcome.value;
        if (outcome.kind == RoundOutcome::Kind::decide && !st.decided) {
          st.decided = Decision{outcome.value, st.r};
          out.events.emplace_back(Decided{outcome.value, st.r});
        }
        out.events.emplace_back(RoundAdvanced{st.r + 1});
        hb_enter_round(out, st.r + 1);
      }
    }

  }  // namespace

  StepOutput<HbState> hb_propose(ProcessId self, BinVal v, const Params &p) {
    StepOutput<HbState> out;
    out.state.self = self;
    out.state.est = v;
    check_message(make(MsgKind::bv, 1, v, self), p);
    hb_enter_round(out, 1);
    return out;
  }

  StepOutput<HbState> hb_handle(const HbState &s,
                                const Message &m,
                                const Params &p,
                                const CoinFn &coin) {
    StepOutput<HbState> out{s, {}, {}};
    check_message(m, p);
    out.state.ledger.record(m);
    hb_progress(out, p, coin);
    return out;
  }

}  // namespace bftmc
