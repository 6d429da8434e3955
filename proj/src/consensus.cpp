/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/consensus.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "bftmc/builtin.hpp"

namespace bftmc::consensus {

  const char *to_string(Tag t) {
    switch (t) {
      case Tag::undecided:
        return "u";
      case Tag::decided1:
        return "a1";
      case Tag::decided2:
        return "a2";
    }
    return "?";
  }

  bool RoundProduct::terminal(int base) const {
    return base == next_est[0] || base == next_est[1] || base == decided[0] ||
           base == decided[1];
  }

  RoundProduct make_round_product(const ta::ThresholdAutomatonModel &round) {
    auto need = [&](const std::string &name) {
      auto i = round.location_index(name);
      if (!i) {
        throw std::invalid_argument("round automaton lacks location " + name);
      }
      return *i;
    };
    RoundProduct rp;
    rp.base_locations = static_cast<int>(round.locations.size());
    rp.halted = 3 * rp.base_locations;
    rp.start = {need("locV0"), need("locV1")};
    for (int w = 0; w < 2; ++w) {
      rp.next_est[w] = need(ta::kNextEst[w]);
      rp.decided[w] = need(ta::kDecided[w]);
    }

    ta::ThresholdAutomatonModel m;
    m.name = round.name + "_tagged";
    m.params = round.params;
    m.resilience = round.resilience;
    m.shared = round.shared;
    for (Tag t : kTags) {
      for (const auto &l : round.locations) {
        m.locations.push_back(l + "_" + to_string(t));
      }
    }
    m.locations.emplace_back("halted");
    m.initial = {rp.loc(Tag::undecided, rp.start[0]),
                 rp.loc(Tag::undecided, rp.start[1])};
    for (Tag t : kTags) {
      for (const auto &r : round.rules) {
        ta::Rule c = r;
        c.id = r.id + "_" + to_string(t);
        c.from = rp.loc(t, r.from);
        c.to = rp.loc(t, r.to);
        m.rules.push_back(std::move(c));
      }
    }
    rp.model = std::make_shared<const ta::ThresholdAutomatonModel>(std::move(m));
    return rp;
  }

  bool at_barrier(const RoundProduct &rp, const ta::Configuration &c) {
    for (Tag t : kTags) {
      for (int b = 0; b < rp.base_locations; ++b) {
        if (!rp.terminal(b) && c.kappa(rp.loc(t, b)) != 0) {
          return false;
        }
      }
    }
    return true;
  }

  std::pair<ta::Configuration, Bits> barrier(const RoundProduct &rp,
                                             const ta::Configuration &end,
                                             Bits bits) {
    ta::Configuration next{std::vector<int>(end.values.size(), 0)};
    auto add = [&](int loc, int k) {
      next.values[static_cast<std::size_t>(loc)] += k;
    };
    for (int w = 0; w < 2; ++w) {
      int dec = end.kappa(rp.loc(Tag::undecided, rp.decided[w]));
      if (dec > 0) {
        bits.decided[w] = true;
      }
      add(rp.loc(Tag::decided1, rp.start[w]), dec);
      add(rp.loc(Tag::undecided, rp.start[w]),
          end.kappa(rp.loc(Tag::undecided, rp.next_est[w])));
      add(rp.loc(Tag::decided2, rp.start[w]),
          end.kappa(rp.loc(Tag::decided1, rp.decided[w])) +
              end.kappa(rp.loc(Tag::decided1, rp.next_est[w])));
      add(rp.halted, end.kappa(rp.loc(Tag::decided2, rp.decided[w])) +
                         end.kappa(rp.loc(Tag::decided2, rp.next_est[w])));
    }
    add(rp.halted, end.kappa(rp.halted));
    return {next, bits};
  }

  namespace {

    BinVal round_parity(Round r) {
      return bin(static_cast<int>(parity(r)));
    }

    ta::LinearExpr sum(const std::vector<int> &locs) {
      ta::LinearExpr e;
      for (int l : locs) {
        e.coeffs[ta::Term{ta::TermKind::location, l}] += 1;
      }
      return e;
    }

    // sum(locs) >= k
    ta::Prop at_least(const std::vector<int> &locs, long k) {
      ta::LinearExpr e = sum(locs);
      e.constant = -k;
      return ta::Prop::of({e, ta::Rel::ge});
    }

    ta::Prop none(const std::vector<int> &locs) {
      ta::LinearExpr e = sum(locs);
      e.constant = -1;
      return ta::Prop::of({e, ta::Rel::lt});
    }

    struct Env {
      RoundProduct rp[2];
      std::unique_ptr<ta::Instance> inst[2];

      Env(const RoundModelFactory &factory, const Params &p, bool unsafe) {
        for (BinVal v : kBinVals) {
          auto &r = rp[to_int(v)];
          r = make_round_product(factory(v));
          inst[to_int(v)] = std::make_unique<ta::Instance>(r.model, p, unsafe);
        }
        if (rp[0].model->locations != rp[1].model->locations ||
            rp[0].model->shared != rp[1].model->shared) {
          throw std::invalid_argument(
              "round automata of both parities must share locations");
        }
      }

      const RoundProduct &product(Round r) const {
        return rp[to_int(round_parity(r))];
      }
      const ta::Instance &instance(Round r) const {
        return *inst[to_int(round_parity(r))];
      }
    };

    struct Node {
      Round round = 1;
      ta::Configuration start;
      Bits bits;
      std::int64_t parent = -1;
      ta::Configuration parent_end;  // exit configuration of the parent round
    };

    int undecided_count(const RoundProduct &rp, const ta::Configuration &c) {
      int k = 0;
      for (int b = 0; b < rp.base_locations; ++b) {
        k += c.kappa(rp.loc(Tag::undecided, b));
      }
      return k;
    }

    std::vector<Node> first_round(const Env &env,
                                  const Params &p,
                                  const std::vector<int> &zeros) {
      const auto &rp = env.product(1);
      std::vector<Node> out;
      for (int k0 : zeros) {
        Node n;
        n.start = env.instance(1).empty_configuration();
        n.start.values[static_cast<std::size_t>(
            rp.loc(Tag::undecided, rp.start[0]))] = k0;
        n.start.values[static_cast<std::size_t>(
            rp.loc(Tag::undecided, rp.start[1]))] = p.correct() - k0;
        out.push_back(std::move(n));
      }
      return out;
    }

    // Segments from round 1 up to (excluding) the round of nodes[id].
    std::vector<RoundSegment> history(const Env &env,
                                      const std::vector<Node> &nodes,
                                      std::int64_t id,
                                      const check::Options &opts) {
      std::vector<RoundSegment> out;
      for (auto k = id; nodes[static_cast<std::size_t>(k)].parent >= 0;
           k = nodes[static_cast<std::size_t>(k)].parent) {
        const auto &child = nodes[static_cast<std::size_t>(k)];
        const auto &par = nodes[static_cast<std::size_t>(child.parent)];
        auto rr = check::reach(env.instance(par.round), {par.start}, opts);
        auto at = rr.find(child.parent_end);
        out.push_back(
            {par.round, round_parity(par.round), rr.trace_to(at.value())});
      }
      std::reverse(out.begin(), out.end());
      return out;
    }

    std::int64_t node_for(const std::vector<Node> &nodes,
                          const std::vector<std::int64_t> &layer,
                          const ta::Configuration &start,
                          const Bits *bits) {
      for (auto id : layer) {
        const auto &n = nodes[static_cast<std::size_t>(id)];
        if (n.start == start && (bits == nullptr || n.bits == *bits)) {
          return id;
        }
      }
      throw std::logic_error("witness start not among round starts");
    }

    std::vector<int> first_splits(const Params &p, Inputs in) {
      std::vector<int> out;
      if (in == Inputs::all_zero) {
        out = {p.correct()};
      } else if (in == Inputs::all_one) {
        out = {0};
      } else if (in == Inputs::unanimous) {
        out = {p.correct(), 0};
        if (p.correct() == 0) {
          out.pop_back();
        }
      } else {
        for (int k = p.correct(); k >= 0; --k) {
          out.push_back(k);
        }
      }
      return out;
    }

  }  // namespace

  Result check_consensus(const RoundModelFactory &factory,
                         const Params &p,
                         Round max_rounds,
                         const std::string &property,
                         const Options &opts) {
    if (max_rounds < 1) {
      throw std::invalid_argument("round bound must be at least 1");
    }
    bool termination = property == "termination";
    std::optional<BinVal> validity;
    if (property == "validity0" || property == "validity1") {
      validity = bin(property.back() - '0');
    } else if (!termination && property != "agreement") {
      throw std::invalid_argument("unknown consensus property '" + property +
                                  "'");
    }

    Env env(factory, p, opts.allow_unsafe);
    Result res;
    res.property = property;

    std::vector<int> zeros;
    if (validity) {
      zeros = {*validity == BinVal::zero ? p.correct() : 0};
    } else if (termination) {
      zeros = first_splits(p, opts.termination_inputs);
    } else {
      zeros = first_splits(p, Inputs::all);
    }
    std::vector<Node> nodes = first_round(env, p, zeros);
    std::vector<std::int64_t> layer;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      layer.push_back(static_cast<std::int64_t>(i));
    }

    for (Round r = 1; r <= max_rounds && !layer.empty(); ++r) {
      res.rounds = r;
      const auto &rp = env.product(r);
      const auto &inst = env.instance(r);
      std::vector<int> u_dec[2], u_open, busy;
      for (int b = 0; b < rp.base_locations; ++b) {
        bool term = rp.terminal(b);
        if (b != rp.decided[0] && b != rp.decided[1]) {
          u_open.push_back(rp.loc(Tag::undecided, b));
        }
        for (Tag t : kTags) {
          if (!term) {
            busy.push_back(rp.loc(t, b));
          }
        }
      }
      for (int w = 0; w < 2; ++w) {
        u_dec[w] = {rp.loc(Tag::undecided, rp.decided[w])};
      }

      if (termination) {
        std::vector<ta::Configuration> starts;
        for (auto id : layer) {
          starts.push_back(nodes[static_cast<std::size_t>(id)].start);
        }
        ta::SpecFormula spec;
        spec.name = "round_progress";
        spec.kind = ta::SpecFormula::Kind::liveness;
        spec.goal = ta::Prop::any({none(u_open), none(busy)});
        auto v = check::check_liveness(inst, spec, starts, opts.check);
        res.stats += v.stats;
        if (v.violated()) {
          auto lasso = std::get<check::Lasso>(*v.witness);
          auto id = node_for(nodes, layer, lasso.prefix.initial, nullptr);
          ConsensusWitness w;
          w.rounds = history(env, nodes, id, opts.check);
          w.stuck = std::move(lasso);
          res.kind = check::Verdict::Kind::violated;
          res.witness = std::move(w);
          return res;
        }
      }

      // Group starts by decision bits; the safety predicate depends on them.
      std::map<int, std::vector<std::int64_t>> groups;
      for (auto id : layer) {
        const auto &b = nodes[static_cast<std::size_t>(id)].bits;
        groups[(b.decided[0] ? 1 : 0) | (b.decided[1] ? 2 : 0)].push_back(id);
      }
      std::vector<std::int64_t> next_layer;
      std::map<std::pair<std::vector<int>, int>, std::int64_t> seen;
      for (const auto &[key, ids] : groups) {
        Bits bits = nodes[static_cast<std::size_t>(ids.front())].bits;
        std::vector<ta::Prop> bad_parts;
        if (validity) {
          bad_parts.push_back(at_least(u_dec[to_int(!*validity)], 1));
        } else if (!termination) {
          bad_parts.push_back(ta::Prop::all(
              {at_least(u_dec[0], 1), at_least(u_dec[1], 1)}));
          for (int w = 0; w < 2; ++w) {
            if (bits.decided[1 - w]) {
              bad_parts.push_back(at_least(u_dec[w], 1));
            }
          }
        }
        auto bad = inst.compile(ta::Prop::any(bad_parts));

        std::vector<ta::Configuration> starts;
        for (auto id : ids) {
          starts.push_back(nodes[static_cast<std::size_t>(id)].start);
        }
        auto rr = check::reach(inst, starts, opts.check);
        res.stats += rr.stats;
        for (std::size_t i = 0; i < rr.states.size(); ++i) {
          if (!bad_parts.empty() && bad.eval(rr.states[i])) {
            auto trace = rr.trace_to(i);
            auto id = node_for(nodes, ids, trace.initial, &bits);
            ConsensusWitness w;
            w.rounds = history(env, nodes, id, opts.check);
            w.rounds.push_back({r, round_parity(r), std::move(trace)});
            res.kind = check::Verdict::Kind::violated;
            res.witness = std::move(w);
            return res;
          }
        }
        if (r == max_rounds && !termination) {
          continue;
        }
        for (std::size_t i = 0; i < rr.states.size(); ++i) {
          const auto &end = rr.states[i];
          if (!at_barrier(rp, end)) {
            continue;
          }
          auto [start, nb] = barrier(rp, end, bits);
          if (undecided_count(rp, start) == 0) {
            continue;
          }
          int nkey = (nb.decided[0] ? 1 : 0) | (nb.decided[1] ? 2 : 0);
          auto [it, fresh] = seen.try_emplace({start.values, nkey},
                                              static_cast<std::int64_t>(nodes.size()));
          if (!fresh) {
            continue;
          }
          auto origin = node_for(nodes, ids, rr.trace_to(i).initial, &bits);
          nodes.push_back({r + 1, std::move(start), nb, origin, end});
          next_layer.push_back(it->second);
        }
      }
      layer = std::move(next_layer);
    }

    if (termination && !layer.empty()) {
      res.kind = check::Verdict::Kind::unknown_at_bound;
    }
    return res;
  }

  std::vector<Result> check_consensus_all(const RoundModelFactory &factory,
                                          const Params &p,
                                          Round max_rounds,
                                          const Options &opts) {
    std::vector<Result> out;
    for (const char *prop : kProperties) {
      out.push_back(check_consensus(factory, p, max_rounds, prop, opts));
    }
    return out;
  }

  std::optional<std::string> replay_consensus(const RoundModelFactory &factory,
                                              const Params &p,
                                              const ConsensusWitness &w,
                                              bool allow_unsafe) {
    if (w.rounds.empty() && !w.stuck) {
      return std::string("empty witness");
    }
    Env env(factory, p, allow_unsafe);
    std::optional<ta::Configuration> expected;
    Bits bits;
    Round next_round = 1;
    for (const auto &seg : w.rounds) {
      std::string where = "round " + std::to_string(seg.round);
      if (seg.round != next_round || seg.parity != round_parity(seg.round)) {
        return where + ": rounds out of sequence";
      }
      if (expected && seg.trace.initial != *expected) {
        return where + ": start does not follow from the previous round";
      }
      if (!expected &&
          undecided_count(env.product(seg.round), seg.trace.initial) !=
              p.correct()) {
        return where + ": first round must start with every process undecided";
      }
      if (auto e = check::replay_trace(env.instance(seg.round), seg.trace)) {
        return where + ": " + *e;
      }
      const auto &end = seg.trace.last();
      ++next_round;
      if (at_barrier(env.product(seg.round), end)) {
        auto [s, b] = barrier(env.product(seg.round), end, bits);
        expected = s;
        bits = b;
      } else {
        expected.reset();
        if (&seg != &w.rounds.back()) {
          return where + ": ends before the round barrier";
        }
      }
    }
    if (w.stuck) {
      if (expected && w.stuck->prefix.initial != *expected) {
        return std::string("stuck round does not follow the previous round");
      }
      if (auto e = check::replay_lasso(env.instance(next_round), *w.stuck)) {
        return "stuck round: " + *e;
      }
    }
    return std::nullopt;
  }

}  // namespace bftmc::consensus
