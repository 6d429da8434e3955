/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_SIMNET_HPP
#define BFTMC_SIMNET_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bftmc/core.hpp"
#include "bftmc/protocols.hpp"

namespace bftmc::simnet {

  struct Envelope {
    Message msg;
    ProcessId dest = 0;
    friend auto operator<=>(const Envelope &, const Envelope &) = default;
  };

  struct Deliver {
    std::size_t index = 0;
    friend bool operator==(const Deliver &, const Deliver &) = default;
  };
  /// A message from a Byzantine sender, handled by `dest` at once.
  struct Inject {
    Message msg;
    ProcessId dest = 0;
    friend bool operator==(const Inject &, const Inject &) = default;
  };
  struct Stutter {
    friend bool operator==(const Stutter &, const Stutter &) = default;
  };

  using Action = std::variant<Deliver, Inject, Stutter>;
  using Schedule = std::vector<Action>;

  std::string to_string(const Action &a);

  /// An illegal action; `step` is its 0-based position in the schedule.
  class ScheduleError : public std::runtime_error {
   public:
    ScheduleError(std::size_t step, const std::string &what)
        : std::runtime_error("step " + std::to_string(step) + ": " + what),
          step_(step) {}
    std::size_t step() const {
      return step_;
    }

   private:
    std::size_t step_;
  };

  /// Exploration exceeded its state cap.
  class ResourceError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  struct LogEntry {
    std::size_t step = 0;
    ProcessId process = 0;
    Event event;
    friend bool operator==(const LogEntry &, const LogEntry &) = default;
  };

  template <class State>
  using Handler =
      std::function<StepOutput<State>(const State &, const Message &)>;

  /**
   * Correct processes are 0 .. n-f-1 and own a machine each; the top f ids
   * are Byzantine and exist only as message sources.
   */
  template <class State>
  struct World {
    Params params;
    std::vector<State> machines;
    /// Insertion-ordered; Deliver indexes into it.
    std::vector<Envelope> inflight;
    std::vector<LogEntry> log;
    std::set<std::tuple<MsgKind, Round, BinVal, ProcessId, ProcessId>> injected;
    std::size_t steps = 0;
    /// Actions applied so far.
    Schedule trail;

    bool is_byzantine(ProcessId p) const {
      return params.is_byzantine(p);
    }
    int correct() const {
      return params.correct();
    }
  };

  namespace detail {

    template <class State>
    void absorb(World<State> &w, ProcessId who, StepOutput<State> out) {
      w.machines[who] = std::move(out.state);
      for (auto &e : out.events) {
        w.log.push_back({w.steps, who, std::move(e)});
      }
      for (const auto &m : out.out_msgs) {
        for (ProcessId d = 0; d < static_cast<ProcessId>(w.correct()); ++d) {
          w.inflight.push_back({m, d});
        }
      }
    }

  }  // namespace detail

  /**
   * Starts one machine per correct process. `start(pid, input)` returns the
   * initial StepOutput whose messages are broadcast to every correct process.
   */
  template <class State, class Start>
  World<State> make_world(const Params &p,
                          const std::vector<BinVal> &inputs,
                          Start start) {
    if (auto bad = validate_params(p, true)) {
      throw std::invalid_argument(*bad);
    }
    if (static_cast<int>(inputs.size()) != p.correct()) {
      throw std::invalid_argument("need one input per correct process");
    }
    World<State> w;
    w.params = p;
    w.machines.resize(inputs.size());
    for (ProcessId i = 0; i < inputs.size(); ++i) {
      detail::absorb(w, i, start(i, inputs[i]));
    }
    return w;
  }

  /// Throws ScheduleError (with step = w.steps) when the action is illegal.
  template <class State>
  void apply(World<State> &w, const Action &a, const Handler<State> &handle) {
    std::size_t step = w.steps;
    if (const auto *d = std::get_if<Deliver>(&a)) {
      if (d->index >= w.inflight.size()) {
        throw ScheduleError(step, "deliver index " + std::to_string(d->index) +
                                      " out of range (" +
                                      std::to_string(w.inflight.size()) +
                                      " in flight)");
      }
      Envelope e = w.inflight[d->index];
      w.inflight.erase(w.inflight.begin() +
                       static_cast<std::ptrdiff_t>(d->index));
      detail::absorb(w, e.dest, handle(w.machines[e.dest], e.msg));
    } else if (const auto *in = std::get_if<Inject>(&a)) {
      const Message &m = in->msg;
      if (!w.is_byzantine(m.sender)) {
        throw ScheduleError(step, "inject from non-Byzantine sender " +
                                      std::to_string(m.sender));
      }
      if (in->dest >= static_cast<ProcessId>(w.correct())) {
        throw ScheduleError(step, "inject to non-correct destination " +
                                      std::to_string(in->dest));
      }
      try {
        check_message(m, w.params);
      } catch (const std::invalid_argument &ex) {
        throw ScheduleError(step, ex.what());
      }
      auto key = std::make_tuple(m.kind, m.round, m.value, m.sender, in->dest);
      if (!w.injected.insert(key).second) {
        throw ScheduleError(step, "duplicate inject " + to_string(m) +
                                      " to " + std::to_string(in->dest));
      }
      detail::absorb(w, in->dest, handle(w.machines[in->dest], m));
    }
    w.trail.push_back(a);
    ++w.steps;
  }

  template <class State>
  void run_schedule(World<State> &w,
                    const Schedule &s,
                    const Handler<State> &handle) {
    for (const auto &a : s) {
      apply(w, a, handle);
    }
  }

  /// Every inject that would add a sender to some correct ledger.
  template <class State>
  std::vector<Inject> useful_injects(const World<State> &w,
                                     const std::vector<Message> &alphabet) {
    std::vector<Inject> out;
    for (const auto &m : alphabet) {
      if (!w.is_byzantine(m.sender)) {
        continue;
      }
      for (ProcessId d = 0; d < static_cast<ProcessId>(w.correct()); ++d) {
        if (!w.injected.contains(
                std::make_tuple(m.kind, m.round, m.value, m.sender, d)) &&
            !w.machines[d].ledger.has(m.kind, m.round, m.value, m.sender)) {
          out.push_back({m, d});
        }
      }
    }
    return out;
  }

  template <class State>
  bool quiescent(const World<State> &w, const std::vector<Message> &alphabet) {
    return w.inflight.empty() && useful_injects(w, alphabet).empty();
  }

  namespace detail {

    template <class T>
    void put(std::string &k, T v) {
      k.append(reinterpret_cast<const char *>(&v), sizeof v);
    }

    /// LEB128-style unsigned varint.
    inline void put_varint(std::string &k, std::uint64_t v) {
      while (v >= 0x80) {
        k += static_cast<char>((v & 0x7f) | 0x80);
        v >>= 7;
      }
      k += static_cast<char>(v);
    }

    /**
     * Set of byte strings stored back to back in one arena, indexed by an
     * open-addressing table of (offset, length) pairs.
     */
    class KeySet {
     public:
      KeySet() : slots_(1 << 12, kEmpty) {}

      /// True when `k` was not present before.
      bool insert(std::string_view k) {
        if ((size_ + 1) * 2 > slots_.size()) {
          grow();
        }
        std::size_t mask = slots_.size() - 1;
        for (std::size_t i = std::hash<std::string_view>{}(k) & mask;;
             i = (i + 1) & mask) {
          if (slots_[i] == kEmpty) {
            slots_[i] = (static_cast<std::uint64_t>(arena_.size()) << 20) |
                        k.size();
            arena_.append(k);
            ++size_;
            return true;
          }
          if (view(slots_[i]) == k) {
            return false;
          }
        }
      }

      std::size_t size() const {
        return size_;
      }

     private:
      static constexpr std::uint64_t kEmpty = ~0ULL;

      std::string_view view(std::uint64_t slot) const {
        return std::string_view(arena_).substr(slot >> 20, slot & 0xfffff);
      }

      void grow() {
        std::vector<std::uint64_t> next(slots_.size() * 2, kEmpty);
        std::size_t mask = next.size() - 1;
        for (auto s : slots_) {
          if (s == kEmpty) {
            continue;
          }
          std::size_t i = std::hash<std::string_view>{}(view(s)) & mask;
          while (next[i] != kEmpty) {
            i = (i + 1) & mask;
          }
          next[i] = s;
        }
        slots_.swap(next);
      }

      std::string arena_;
      std::vector<std::uint64_t> slots_;
      std::size_t size_ = 0;
    };

  }  // namespace detail

  /// Order-insensitive binary key of (machines, inflight multiset).
  template <class State, class Encode>
  std::string canonical_key(const World<State> &w, const Encode &encode) {
    std::string k;
    for (const auto &m : w.machines) {
      std::string e = encode(m);
      detail::put_varint(k, e.size());
      k += e;
    }
    auto in = w.inflight;
    std::sort(in.begin(), in.end());
    for (const auto &e : in) {
      k += static_cast<char>(static_cast<int>(e.msg.kind) * 2 +
                             to_int(e.msg.value));
      detail::put_varint(k, e.msg.round);
      detail::put_varint(k, e.msg.sender);
      detail::put_varint(k, e.dest);
    }
    return k;
  }

  template <class State>
  struct ExploreResult {
    std::uint64_t states = 0;
    std::vector<World<State>> quiescent;
    /// Per visited world id: the id it was first reached from (-1 for the
    /// start) and the action taken.
    std::vector<std::pair<std::int64_t, Action>> parents;

    /// Actions leading from the start to world `id`.
    Schedule schedule_to(std::size_t id) const {
      Schedule s;
      for (auto k = static_cast<std::int64_t>(id);
           parents[static_cast<std::size_t>(k)].first >= 0;
           k = parents[static_cast<std::size_t>(k)].first) {
        s.push_back(parents[static_cast<std::size_t>(k)].second);
      }
      std::reverse(s.begin(), s.end());
      return s;
    }
  };

  /**
   * Depth-first search over every interleaving of deliveries and of the
   * injects in `alphabet`, deduplicated by canonical_key. `visit` sees each
   * distinct world once together with its id; worlds carry no log or trail
   * (use ExploreResult::schedule_to). Throws ResourceError beyond `cap`
   * states.
   */
  template <class State, class Encode>
  ExploreResult<State> explore_exhaustive(
      const World<State> &start,
      const Handler<State> &handle,
      const std::vector<Message> &alphabet,
      const Encode &encode,
      std::uint64_t cap,
      const std::function<void(const World<State> &, std::size_t)> &visit =
          {}) {
    ExploreResult<State> res;
    detail::KeySet seen;
    World<State> root = start;
    root.log.clear();
    root.trail.clear();
    std::vector<std::pair<World<State>, std::size_t>> stack;
    stack.emplace_back(std::move(root), 0);
    res.parents.emplace_back(-1, Stutter{});
    seen.insert(canonical_key(start, encode));
    while (!stack.empty()) {
      auto [w, id] = std::move(stack.back());
      stack.pop_back();
      ++res.states;
      if (visit) {
        visit(w, id);
      }
      auto injects = useful_injects(w, alphabet);
      if (w.inflight.empty() && injects.empty()) {
        res.quiescent.push_back(w);
        continue;
      }
      auto step = [&](const Action &a) {
        World<State> next = w;
        apply(next, a, handle);
        next.log.clear();
        next.trail.clear();
        if (!seen.insert(canonical_key(next, encode))) {
          return;
        }
        if (seen.size() > cap) {
          throw ResourceError("exploration cap of " + std::to_string(cap) +
                              " states exceeded");
        }
        res.parents.emplace_back(static_cast<std::int64_t>(id), a);
        stack.emplace_back(std::move(next), res.parents.size() - 1);
      };
      for (std::size_t i = 0; i < w.inflight.size(); ++i) {
        // Identical envelopes lead to the same world.
        bool dup = std::find(w.inflight.begin(),
                             w.inflight.begin() + static_cast<std::ptrdiff_t>(i),
                             w.inflight[i]) !=
                   w.inflight.begin() + static_cast<std::ptrdiff_t>(i);
        if (!dup) {
          step(Deliver{i});
        }
      }
      for (const auto &in : injects) {
        step(in);
      }
    }
    return res;
  }

  // Ready-made worlds and encodings for the concrete machines.

  World<BvState> bv_world(const Params &p, const std::vector<BinVal> &inputs);
  Handler<BvState> bv_handler(const Params &p);
  std::string encode(const BvState &s);
  /// BV messages of round 1 from every Byzantine sender, both values.
  std::vector<Message> bv_alphabet(const Params &p);

  World<DbftState> dbft_world(const Params &p,
                              const std::vector<BinVal> &inputs);
  Handler<DbftState> dbft_handler(const Params &p);
  std::string encode(const DbftState &s);
  /// BV and ECHO messages of rounds 1..rounds, Byzantine senders, both values.
  std::vector<Message> dbft_alphabet(const Params &p, Round rounds);

  World<HbState> hb_world(const Params &p, const std::vector<BinVal> &inputs);
  Handler<HbState> hb_handler(const Params &p, CoinFn coin);

  // Schedule JSON: [{"deliver": i}, {"inject": {message}, "to": d},
  // {"stutter": true}], messages as {"kind","round","value","sender"}.
  nlohmann::json to_json(const Message &m);
  Message message_from_json(const nlohmann::json &j);
  nlohmann::json to_json(const Schedule &s);
  /// Throws std::invalid_argument naming the offending entry.
  Schedule schedule_from_json(const nlohmann::json &j);
  nlohmann::json to_json(const std::vector<LogEntry> &log);

}  // namespace bftmc::simnet

#endif  // BFTMC_SIMNET_HPP
