/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/oracle.hpp"

#include <map>
#include <stdexcept>

namespace bftmc::oracle {

  std::string to_string(const Projection &p) {
    return "{}:" + std::to_string(p[0]) + " {0}:" + std::to_string(p[1]) +
           " {1}:" + std::to_string(p[2]) + " {0,1}:" + std::to_string(p[3]);
  }

  namespace {

    // Location indices grouped by the delivered set they stand for.
    struct Groups {
      std::array<std::vector<int>, 4> locs;

      explicit Groups(const ta::ThresholdAutomatonModel &m) {
        const std::array<std::vector<const char *>, 4> names = {{
            {"locV0", "locV1", "locB0", "locB1", "locB01"},
            {"locC0", "locCB0"},
            {"locC1", "locCB1"},
            {"locC01"},
        }};
        for (std::size_t g = 0; g < 4; ++g) {
          for (const char *n : names[g]) {
            auto i = m.location_index(n);
            if (!i) {
              throw std::invalid_argument(
                  std::string("model lacks BV location ") + n);
            }
            locs[g].push_back(*i);
          }
        }
      }

      Projection of(const ta::Configuration &c) const {
        Projection p{};
        for (std::size_t g = 0; g < 4; ++g) {
          for (int l : locs[g]) {
            p[g] += c.kappa(l);
          }
        }
        return p;
      }
    };

  }  // namespace

  Projection project(const ta::ThresholdAutomatonModel &m,
                     const ta::Configuration &c) {
    return Groups(m).of(c);
  }

  Projection project(const simnet::World<BvState> &w) {
    Projection p{};
    for (const auto &s : w.machines) {
      p[s.conts.bits()] += 1;
    }
    return p;
  }

  std::vector<BinVal> split_inputs(const Params &p, int zeros) {
    std::vector<BinVal> in;
    for (int i = 0; i < p.correct(); ++i) {
      in.push_back(i < zeros ? BinVal::zero : BinVal::one);
    }
    return in;
  }

  std::string Discrepancy::describe() const {
    std::string s = "split with " + std::to_string(zeros) +
                    " zero-proposers: projection " + to_string(projection) +
                    (only_in_checker ? " reachable in the automaton only"
                                     : " reachable in the machines only");
    if (checker_witness) {
      s += " (automaton trace of " +
           std::to_string(checker_witness->steps.size()) + " steps)";
    }
    if (simnet_witness) {
      s += " (schedule of " + std::to_string(simnet_witness->size()) +
           " actions)";
    }
    return s;
  }

  Report oracle_equiv(const ta::Instance &inst,
                      std::optional<int> zeros,
                      std::uint64_t sim_cap) {
    const auto &m = inst.model();
    const Params &p = inst.params();
    Groups groups(m);
    auto v0 = m.location_index("locV0");
    auto v1 = m.location_index("locV1");

    Report rep;
    for (int k = 0; k <= p.correct(); ++k) {
      if (zeros && *zeros != k) {
        continue;
      }
      SplitReport sr;
      sr.zeros = k;

      ta::Configuration init = inst.empty_configuration();
      init.values[static_cast<std::size_t>(*v0)] = k;
      init.values[static_cast<std::size_t>(*v1)] = p.correct() - k;
      auto rr = check::reach(inst, {init});
      sr.checker_states = rr.states.size();
      std::map<Projection, std::size_t> first_ta;
      for (std::size_t i = 0; i < rr.states.size(); ++i) {
        auto pr = groups.of(rr.states[i]);
        if (sr.checker.insert(pr).second) {
          first_ta[pr] = i;
        }
      }

      std::map<Projection, std::size_t> first_sim;
      auto world = simnet::bv_world(p, split_inputs(p, k));
      auto res = simnet::explore_exhaustive<BvState>(
          world, simnet::bv_handler(p), simnet::bv_alphabet(p),
          [](const BvState &s) { return simnet::encode(s); }, sim_cap,
          [&](const simnet::World<BvState> &w, std::size_t id) {
            auto pr = project(w);
            if (sr.simnet.insert(pr).second) {
              first_sim[pr] = id;
            }
          });
      sr.simnet_states = res.states;

      if (sr.checker != sr.simnet) {
        rep.equal = false;
        if (!rep.first) {
          Discrepancy d;
          d.zeros = k;
          for (const auto &pr : sr.checker) {
            if (!sr.simnet.contains(pr)) {
              d.projection = pr;
              d.only_in_checker = true;
              d.checker_witness = rr.trace_to(first_ta[pr]);
              break;
            }
          }
          if (!d.checker_witness) {
            for (const auto &pr : sr.simnet) {
              if (!sr.checker.contains(pr)) {
                d.projection = pr;
                d.simnet_witness = res.schedule_to(first_sim[pr]);
                break;
              }
            }
          }
          rep.first = std::move(d);
        }
      }
      rep.splits.push_back(std::move(sr));
    }
    return rep;
  }

  std::optional<simnet::Schedule> find_unjustified_delivery(
      const Params &p,
      std::uint64_t cap) {
    for (int k = 0; k <= p.correct(); ++k) {
      BinSet proposed;
      auto inputs = split_inputs(p, k);
      for (BinVal v : inputs) {
        proposed.insert(v);
      }
      std::optional<std::size_t> found;
      auto world = simnet::bv_world(p, inputs);
      auto res = simnet::explore_exhaustive<BvState>(
          world, simnet::bv_handler(p), simnet::bv_alphabet(p),
          [](const BvState &s) { return simnet::encode(s); }, cap,
          [&](const simnet::World<BvState> &w, std::size_t id) {
            if (found) {
              return;
            }
            for (const auto &s : w.machines) {
              for (BinVal v : kBinVals) {
                if (s.conts.contains(v) && !proposed.contains(v)) {
                  found = id;
                  return;
                }
              }
            }
          });
      if (found) {
        return res.schedule_to(*found);
      }
    }
    return std::nullopt;
  }

}  // namespace bftmc::oracle
