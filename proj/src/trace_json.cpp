/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/trace_json.hpp"

#include <memory>
#include <stdexcept>

namespace bftmc::trace_json {

  namespace {

    [[noreturn]] void bad(const std::string &what) {
      throw std::invalid_argument(what);
    }

    const ojson &field(const ojson &j, const char *name, const std::string &at) {
      if (!j.is_object() || !j.contains(name)) {
        bad(at + ": missing field '" + name + "'");
      }
      return j.at(name);
    }

    ojson stats_json(const check::Stats &s, bool timing) {
      ojson j;
      j["states"] = s.states;
      j["transitions"] = s.transitions;
      if (timing) {
        j["wall_ms"] = s.wall_ms;
      }
      return j;
    }

    ojson model_json(const ta::Instance &inst, const std::string &source) {
      const auto &m = inst.model();
      const auto &p = inst.params();
      ojson j;
      j["name"] = m.name;
      j["source"] = source;
      j["params"] = ojson{{"n", p.n}, {"t", p.t}, {"f", p.f}};
      j["locations"] = m.locations;
      j["shared"] = m.shared;
      return j;
    }

    ojson steps_json(const ta::Instance &inst,
                     const std::vector<check::Step> &steps) {
      ojson a = ojson::array();
      for (const auto &s : steps) {
        a.push_back(to_json(inst, s));
      }
      return a;
    }

    std::vector<check::Step> steps_from_json(const ta::Instance &inst,
                                             const ojson &j,
                                             const std::string &at) {
      if (!j.is_array()) {
        bad(at + ": expected an array of steps");
      }
      std::vector<check::Step> out;
      for (std::size_t i = 0; i < j.size(); ++i) {
        std::string here = at + "[" + std::to_string(i) + "]";
        const auto &rule = field(j[i], "rule", here);
        if (!rule.is_string()) {
          bad(here + ".rule: expected a string");
        }
        check::Step s;
        auto id = rule.get<std::string>();
        if (id != "stutter") {
          auto r = inst.model().rule_index(id);
          if (!r) {
            bad(here + ".rule: unknown rule '" + id + "'");
          }
          s.rule = *r;
        }
        s.after = configuration_from_json(inst, field(j[i], "after", here));
        out.push_back(std::move(s));
      }
      return out;
    }

    check::Trace trace_from(const ta::Instance &inst,
                            const ojson &j,
                            const char *steps,
                            const std::string &at) {
      check::Trace t;
      t.initial = configuration_from_json(inst, field(j, "initial", at));
      t.steps = steps_from_json(inst, field(j, steps, at), at + "." + steps);
      return t;
    }

    std::string config_text(const ojson &c) {
      std::string s;
      for (const auto &[k, v] : c.at("kappa").items()) {
        if (v.get<int>() != 0) {
          s += (s.empty() ? "" : " ") + k + "=" + v.dump();
        }
      }
      s += " |";
      for (const auto &[k, v] : c.at("shared").items()) {
        s += " " + k + "=" + v.dump();
      }
      return s;
    }

    std::string steps_text(const ojson &steps, const std::string &indent) {
      std::string s;
      for (const auto &st : steps) {
        s += indent + st.at("rule").get<std::string>() + ": " +
             st.at("rendering").get<std::string>() + "  => " +
             config_text(st.at("after")) + "\n";
      }
      return s;
    }

    // Round-product instances for both parities.
    struct Rounds {
      std::unique_ptr<ta::Instance> inst[2];

      Rounds(const consensus::RoundModelFactory &factory,
             const Params &p,
             bool unsafe) {
        for (BinVal v : kBinVals) {
          auto rp = consensus::make_round_product(factory(v));
          inst[to_int(v)] = std::make_unique<ta::Instance>(rp.model, p, unsafe);
        }
      }
      const ta::Instance &at(Round r) const {
        return *inst[to_int(parity(r))];
      }
    };

  }  // namespace

  ojson to_json(const ta::Instance &inst, const ta::Configuration &c) {
    const auto &m = inst.model();
    ojson kappa = ojson::object();
    for (int l = 0; l < inst.num_locations(); ++l) {
      kappa[m.locations[static_cast<std::size_t>(l)]] = c.kappa(l);
    }
    ojson shared = ojson::object();
    for (int v = 0; v < inst.num_shared(); ++v) {
      shared[m.shared[static_cast<std::size_t>(v)]] =
          c.values[static_cast<std::size_t>(inst.shared_slot(v))];
    }
    return ojson{{"kappa", std::move(kappa)}, {"shared", std::move(shared)}};
  }

  ta::Configuration configuration_from_json(const ta::Instance &inst,
                                            const ojson &j) {
    const auto &m = inst.model();
    ta::Configuration c = inst.empty_configuration();
    auto read = [&](const char *part, const std::vector<std::string> &names,
                    int offset) {
      const auto &obj = field(j, part, "configuration");
      if (!obj.is_object() || obj.size() != names.size()) {
        bad(std::string("configuration.") + part + ": expected " +
            std::to_string(names.size()) + " entries");
      }
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (!obj.contains(names[i]) || !obj.at(names[i]).is_number_integer()) {
          bad(std::string("configuration.") + part + ": missing integer '" +
              names[i] + "'");
        }
        c.values[static_cast<std::size_t>(offset) + i] =
            obj.at(names[i]).get<int>();
      }
    };
    read("kappa", m.locations, 0);
    read("shared", m.shared, inst.num_locations());
    return c;
  }

  ojson to_json(const ta::Instance &inst, const check::Step &s) {
    ojson j;
    if (s.rule == check::kStutter) {
      j["rule"] = "stutter";
      j["rendering"] = "stutter";
    } else {
      const auto &r = inst.model().rules[static_cast<std::size_t>(s.rule)];
      j["rule"] = r.id;
      j["rendering"] = ta::render_rule(inst.model(), r);
    }
    j["after"] = to_json(inst, s.after);
    return j;
  }

  ojson to_json(const ta::Instance &inst, const check::Witness &w) {
    ojson j;
    if (const auto *t = std::get_if<check::Trace>(&w)) {
      j["kind"] = "trace";
      j["initial"] = to_json(inst, t->initial);
      j["steps"] = steps_json(inst, t->steps);
    } else {
      const auto &l = std::get<check::Lasso>(w);
      j["kind"] = "lasso";
      j["initial"] = to_json(inst, l.prefix.initial);
      j["prefix"] = steps_json(inst, l.prefix.steps);
      j["cycle"] = steps_json(inst, l.cycle);
    }
    return j;
  }

  check::Witness witness_from_json(const ta::Instance &inst, const ojson &j) {
    const auto &kind = field(j, "kind", "witness");
    if (kind == "trace") {
      return trace_from(inst, j, "steps", "witness");
    }
    if (kind == "lasso") {
      check::Lasso l;
      l.prefix = trace_from(inst, j, "prefix", "witness");
      l.cycle = steps_from_json(inst, field(j, "cycle", "witness"),
                                "witness.cycle");
      return l;
    }
    bad("witness.kind: expected \"trace\" or \"lasso\"");
  }

  ojson document(const ta::Instance &inst,
                 const std::string &source,
                 const std::string &property,
                 const check::Verdict &v,
                 bool timing) {
    ojson j;
    j["schema"] = kSchema;
    j["model"] = model_json(inst, source);
    j["property"] = property;
    j["verdict"] = check::to_string(v.kind);
    j["stats"] = stats_json(v.stats, timing);
    if (v.witness) {
      j["witness"] = to_json(inst, *v.witness);
    }
    return j;
  }

  ojson document(const consensus::RoundModelFactory &factory,
                 const Params &p,
                 const std::string &source,
                 const consensus::Result &r,
                 bool allow_unsafe,
                 bool timing) {
    Rounds rounds(factory, p, allow_unsafe);
    ojson j;
    j["schema"] = kSchema;
    j["model"] = model_json(rounds.at(1), source);
    j["model"]["rounds"] = r.rounds;
    j["property"] = r.property;
    j["verdict"] = check::to_string(r.kind);
    j["stats"] = stats_json(r.stats, timing);
    if (r.witness) {
      ojson w;
      w["kind"] = "rounds";
      ojson segs = ojson::array();
      for (const auto &seg : r.witness->rounds) {
        const auto &inst = rounds.at(seg.round);
        ojson s;
        s["round"] = seg.round;
        s["parity"] = to_int(seg.parity);
        s["initial"] = to_json(inst, seg.trace.initial);
        s["steps"] = steps_json(inst, seg.trace.steps);
        segs.push_back(std::move(s));
      }
      w["rounds"] = std::move(segs);
      if (r.witness->stuck) {
        Round k = r.witness->rounds.empty()
                      ? 1
                      : r.witness->rounds.back().round + 1;
        auto stuck = to_json(rounds.at(k), check::Witness{*r.witness->stuck});
        stuck.erase("kind");
        ojson s;
        s["round"] = k;
        s["parity"] = to_int(parity(k));
        s.update(stuck);
        w["stuck"] = std::move(s);
      }
      j["witness"] = std::move(w);
    }
    return j;
  }

  consensus::ConsensusWitness consensus_witness_from_json(
      const consensus::RoundModelFactory &factory,
      const Params &p,
      const ojson &j,
      bool allow_unsafe) {
    if (field(j, "kind", "witness") != "rounds") {
      bad("witness.kind: expected \"rounds\"");
    }
    Rounds rounds(factory, p, allow_unsafe);
    consensus::ConsensusWitness w;
    const auto &segs = field(j, "rounds", "witness");
    if (!segs.is_array()) {
      bad("witness.rounds: expected an array");
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
      std::string at = "witness.rounds[" + std::to_string(i) + "]";
      const auto &rj = field(segs[i], "round", at);
      if (!rj.is_number_unsigned() || rj.get<Round>() < 1) {
        bad(at + ".round: expected a positive integer");
      }
      consensus::RoundSegment seg;
      seg.round = rj.get<Round>();
      seg.parity = bin(field(segs[i], "parity", at).get<int>());
      seg.trace = trace_from(rounds.at(seg.round), segs[i], "steps", at);
      w.rounds.push_back(std::move(seg));
    }
    if (j.contains("stuck")) {
      const auto &s = j.at("stuck");
      Round k = field(s, "round", "witness.stuck").get<Round>();
      const auto &inst = rounds.at(k);
      check::Lasso l;
      l.prefix = trace_from(inst, s, "prefix", "witness.stuck");
      l.cycle = steps_from_json(inst, field(s, "cycle", "witness.stuck"),
                                "witness.stuck.cycle");
      w.stuck = std::move(l);
    }
    return w;
  }

  std::optional<std::string> validate(const ta::Instance &inst,
                                      const ojson &doc) {
    if (!doc.contains("witness")) {
      return std::nullopt;
    }
    try {
      auto w = witness_from_json(inst, doc.at("witness"));
      if (const auto *t = std::get_if<check::Trace>(&w)) {
        return check::replay_trace(inst, *t);
      }
      return check::replay_lasso(inst, std::get<check::Lasso>(w));
    } catch (const std::exception &ex) {
      return std::string(ex.what());
    }
  }

  std::optional<std::string> validate(
      const consensus::RoundModelFactory &factory,
      const Params &p,
      const ojson &doc,
      bool allow_unsafe) {
    if (!doc.contains("witness")) {
      return std::nullopt;
    }
    try {
      auto w = consensus_witness_from_json(factory, p, doc.at("witness"),
                                           allow_unsafe);
      return consensus::replay_consensus(factory, p, w, allow_unsafe);
    } catch (const std::exception &ex) {
      return std::string(ex.what());
    }
  }

  std::string to_text(const ta::Instance &inst, const ta::Configuration &c) {
    return config_text(to_json(inst, c));
  }

  std::string to_text(const ta::Instance &inst, const check::Witness &w) {
    auto j = to_json(inst, w);
    std::string s = "initial: " + config_text(j.at("initial")) + "\n";
    if (j.at("kind") == "trace") {
      return s + steps_text(j.at("steps"), "  ");
    }
    return s + "prefix:\n" + steps_text(j.at("prefix"), "  ") + "cycle:\n" +
           steps_text(j.at("cycle"), "  ");
  }

  std::string document_text(const ojson &doc) {
    const auto &m = doc.at("model");
    const auto &p = m.at("params");
    std::string s = doc.at("property").get<std::string>() + " on " +
                    m.at("name").get<std::string>() + " (n=" +
                    p.at("n").dump() + ", t=" + p.at("t").dump() +
                    ", f=" + p.at("f").dump() + "): " +
                    doc.at("verdict").get<std::string>() + "  [" +
                    doc.at("stats").at("states").dump() + " states]\n";
    if (!doc.contains("witness")) {
      return s;
    }
    const auto &w = doc.at("witness");
    if (w.at("kind") == "rounds") {
      for (const auto &seg : w.at("rounds")) {
        s += "round " + seg.at("round").dump() + " (parity " +
             seg.at("parity").dump() + ")\n  initial: " +
             config_text(seg.at("initial")) + "\n" +
             steps_text(seg.at("steps"), "  ");
      }
      if (w.contains("stuck")) {
        const auto &st = w.at("stuck");
        s += "round " + st.at("round").dump() + " never completes\n" +
             "  initial: " + config_text(st.at("initial")) + "\n" +
             "  prefix:\n" + steps_text(st.at("prefix"), "    ") +
             "  cycle:\n" + steps_text(st.at("cycle"), "    ");
      }
      return s;
    }
    s += "initial: " + config_text(w.at("initial")) + "\n";
    if (w.at("kind") == "trace") {
      return s + steps_text(w.at("steps"), "  ");
    }
    return s + "prefix:\n" + steps_text(w.at("prefix"), "  ") + "cycle:\n" +
           steps_text(w.at("cycle"), "  ");
  }

}  // namespace bftmc::trace_json
