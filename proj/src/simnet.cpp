/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/simnet.hpp"

namespace bftmc::simnet {

  using nlohmann::json;

  std::string to_string(const Action &a) {
    if (const auto *d = std::get_if<Deliver>(&a)) {
      return "deliver " + std::to_string(d->index);
    }
    if (const auto *in = std::get_if<Inject>(&a)) {
      return "inject " + bftmc::to_string(in->msg) + " to " +
             std::to_string(in->dest);
    }
    return "stutter";
  }

  namespace {

    void encode_ledger(std::string &s, const RecvLedger &l) {
      for (const auto &[k, mask] : l.entries()) {
        s += static_cast<char>(static_cast<int>(k.kind) * 2 + to_int(k.value));
        detail::put_varint(s, k.round);
        detail::put_varint(s, mask);
      }
    }

    std::vector<Message> alphabet(const Params &p,
                                  const std::vector<MsgKind> &kinds,
                                  Round rounds) {
      std::vector<Message> out;
      for (ProcessId s = static_cast<ProcessId>(p.correct());
           s < static_cast<ProcessId>(p.n); ++s) {
        for (Round r = 1; r <= rounds; ++r) {
          for (MsgKind k : kinds) {
            for (BinVal v : kBinVals) {
              out.push_back({k, r, v, s});
            }
          }
        }
      }
      return out;
    }

  }  // namespace

  World<BvState> bv_world(const Params &p, const std::vector<BinVal> &inputs) {
    return make_world<BvState>(p, inputs, [&](ProcessId i, BinVal v) {
      return bv_init(i, v, p);
    });
  }

  Handler<BvState> bv_handler(const Params &p) {
    return [p](const BvState &s, const Message &m) {
      return bv_handle(s, m, p);
    };
  }

  std::string encode(const BvState &s) {
    std::string k;
    detail::put(k, static_cast<std::uint8_t>(s.broadcast.bits()));
    detail::put(k, static_cast<std::uint8_t>(s.conts.bits()));
    encode_ledger(k, s.ledger);
    return k;
  }

  std::vector<Message> bv_alphabet(const Params &p) {
    return alphabet(p, {MsgKind::bv}, 1);
  }

  World<DbftState> dbft_world(const Params &p,
                              const std::vector<BinVal> &inputs) {
    return make_world<DbftState>(p, inputs, [&](ProcessId i, BinVal v) {
      return dbft_propose(i, v, p);
    });
  }

  Handler<DbftState> dbft_handler(const Params &p) {
    return [p](const DbftState &s, const Message &m) {
      return dbft_handle(s, m, p);
    };
  }

  std::string encode(const DbftState &s) {
    std::string k;
    detail::put(k, static_cast<std::uint8_t>(s.est));
    detail::put_varint(k, s.r);
    detail::put(k, static_cast<std::uint8_t>(s.phase));
    detail::put(k, static_cast<std::uint8_t>(s.echoes.bits()));
    detail::put(k, static_cast<std::uint8_t>(s.bv_sent.bits()));
    detail::put(k, static_cast<std::uint8_t>(s.decided ? 1 + to_int(s.decided->value) : 0));
    detail::put_varint(k, s.decided ? s.decided->round : Round{0});
    detail::put(k, static_cast<std::uint8_t>(s.halted));
    encode_ledger(k, s.ledger);
    return k;
  }

  std::vector<Message> dbft_alphabet(const Params &p, Round rounds) {
    return alphabet(p, {MsgKind::bv, MsgKind::echo}, rounds);
  }

  World<HbState> hb_world(const Params &p, const std::vector<BinVal> &inputs) {
    return make_world<HbState>(p, inputs, [&](ProcessId i, BinVal v) {
      return hb_propose(i, v, p);
    });
  }

  Handler<HbState> hb_handler(const Params &p, CoinFn coin) {
    return [p, coin = std::move(coin)](const HbState &s, const Message &m) {
      return hb_handle(s, m, p, coin);
    };
  }

  json to_json(const Message &m) {
    return json{{"kind", to_string(m.kind)},
                {"round", m.round},
                {"value", to_int(m.value)},
                {"sender", m.sender}};
  }

  Message message_from_json(const json &j) {
    if (!j.is_object()) {
      throw std::invalid_argument("message must be an object");
    }
    auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) {
      throw std::invalid_argument("unknown message kind");
    }
    int v = j.at("value").get<int>();
    if (v != 0 && v != 1) {
      throw std::invalid_argument("message value must be 0 or 1");
    }
    return Message{*kind, j.at("round").get<Round>(), bin(v),
                   j.at("sender").get<ProcessId>()};
  }

  json to_json(const Schedule &s) {
    json out = json::array();
    for (const auto &a : s) {
      if (const auto *d = std::get_if<Deliver>(&a)) {
        out.push_back({{"deliver", d->index}});
      } else if (const auto *in = std::get_if<Inject>(&a)) {
        out.push_back({{"inject", to_json(in->msg)}, {"to", in->dest}});
      } else {
        out.push_back({{"stutter", true}});
      }
    }
    return out;
  }

  Schedule schedule_from_json(const json &j) {
    if (!j.is_array()) {
      throw std::invalid_argument("schedule must be a JSON array");
    }
    Schedule s;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto &e = j[i];
      try {
        if (!e.is_object()) {
          throw std::invalid_argument("not an object");
        }
        if (e.contains("deliver")) {
          s.push_back(Deliver{e.at("deliver").get<std::size_t>()});
        } else if (e.contains("inject")) {
          s.push_back(Inject{message_from_json(e.at("inject")),
                             e.at("to").get<ProcessId>()});
        } else if (e.contains("stutter")) {
          s.push_back(Stutter{});
        } else {
          throw std::invalid_argument("unknown action");
        }
      } catch (const json::exception &ex) {
        throw std::invalid_argument("schedule entry " + std::to_string(i) +
                                    ": " + ex.what());
      } catch (const std::invalid_argument &ex) {
        throw std::invalid_argument("schedule entry " + std::to_string(i) +
                                    ": " + ex.what());
      }
    }
    return s;
  }

  json to_json(const std::vector<LogEntry> &log) {
    json out = json::array();
    for (const auto &e : log) {
      out.push_back({{"step", e.step},
                     {"process", e.process},
                     {"event", bftmc::to_string(e.event)}});
    }
    return out;
  }

}  // namespace bftmc::simnet
