/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/checker.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <string_view>
#include <thread>
#include <unordered_map>

namespace bftmc::check {

  std::uint64_t state_budget_from_env() {
    const char *env = std::getenv("BFTMC_STATE_BUDGET");
    if (env == nullptr) {
      return kDefaultStateBudget;
    }
    std::string_view s(env);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
      return kDefaultStateBudget;
    }
    return v;
  }

  const char *to_string(Verdict::Kind k) {
    switch (k) {
      case Verdict::Kind::holds:
        return "holds";
      case Verdict::Kind::violated:
        return "violated";
      case Verdict::Kind::unknown_at_bound:
        return "unknown-at-bound";
    }
    return "?";
  }

  namespace {

    using Clock = std::chrono::steady_clock;

    double ms_since(Clock::time_point t0) {
      return std::chrono::duration<double, std::milli>(Clock::now() - t0)
          .count();
    }

    // Open-addressing set of configurations; ids are insertion order.
    class StateStore {
     public:
      explicit StateStore(std::vector<Configuration> &states,
                          std::vector<std::uint32_t> &slots)
          : states_(states), slots_(slots) {
        slots_.assign(1024, 0);
      }

      std::optional<std::uint32_t> find(const Configuration &c) const {
        return find_in(states_, slots_, c);
      }

      static std::optional<std::uint32_t> find_in(
          const std::vector<Configuration> &states,
          const std::vector<std::uint32_t> &slots,
          const Configuration &c) {
        if (slots.empty()) {
          return std::nullopt;
        }
        std::size_t mask = slots.size() - 1;
        for (std::size_t i = ta::ConfigurationHash{}(c) & mask;;
             i = (i + 1) & mask) {
          std::uint32_t s = slots[i];
          if (s == 0) {
            return std::nullopt;
          }
          if (states[s - 1] == c) {
            return s - 1;
          }
        }
      }

      /// Returns (id, inserted).
      std::pair<std::uint32_t, bool> insert(Configuration c) {
        if ((states_.size() + 1) * 2 > slots_.size()) {
          grow();
        }
        std::size_t mask = slots_.size() - 1;
        std::size_t i = ta::ConfigurationHash{}(c) & mask;
        for (;; i = (i + 1) & mask) {
          std::uint32_t s = slots_[i];
          if (s == 0) {
            break;
          }
          if (states_[s - 1] == c) {
            return {s - 1, false};
          }
        }
        states_.push_back(std::move(c));
        auto id = static_cast<std::uint32_t>(states_.size() - 1);
        slots_[i] = id + 1;
        return {id, true};
      }

      std::size_t size() const {
        return states_.size();
      }

     private:
      void grow() {
        std::vector<std::uint32_t> next(slots_.size() * 2, 0);
        std::size_t mask = next.size() - 1;
        for (std::uint32_t id = 0; id < states_.size(); ++id) {
          std::size_t i = ta::ConfigurationHash{}(states_[id]) & mask;
          while (next[i] != 0) {
            i = (i + 1) & mask;
          }
          next[i] = id + 1;
        }
        slots_.swap(next);
      }

      std::vector<Configuration> &states_;
      std::vector<std::uint32_t> &slots_;
    };

    using Succ = std::vector<std::pair<int, Configuration>>;
    using Expand = std::function<void(const Configuration &, Succ &)>;

    struct Graph {
      std::vector<Configuration> states;
      std::vector<std::uint32_t> slots;
      std::vector<std::int64_t> parent;
      std::vector<int> via_rule;
      // Outgoing edges (rule, target) when requested.
      std::vector<std::vector<std::pair<int, std::uint32_t>>> edges;
      Stats stats;
      std::optional<std::uint32_t> stopped_at;
    };

    /**
     * Layered BFS. Successors of a layer are computed in parallel and merged
     * in frontier order, so ids, parents and the stop point are independent
     * of the worker count. `stop` sees each new state once.
     */
    Graph bfs(const std::vector<Configuration> &inits,
              const Expand &expand,
              bool keep_edges,
              const Options &opts,
              const std::function<bool(const Configuration &)> &stop) {
      auto t0 = Clock::now();
      Graph g;
      StateStore store(g.states, g.slots);
      auto budget = opts.state_budget;
      auto add = [&](Configuration c, std::int64_t parent, int rule)
          -> std::pair<std::uint32_t, bool> {
        auto [id, fresh] = store.insert(std::move(c));
        if (fresh) {
          if (store.size() > budget) {
            throw ResourceError("state budget of " + std::to_string(budget) +
                                " configurations exceeded");
          }
          g.parent.push_back(parent);
          g.via_rule.push_back(rule);
          if (keep_edges) {
            g.edges.emplace_back();
          }
        }
        return {id, fresh};
      };

      std::vector<std::uint32_t> frontier;
      for (const auto &c : inits) {
        auto [id, fresh] = add(c, -1, kStutter);
        if (!fresh) {
          continue;
        }
        frontier.push_back(id);
        if (stop && stop(g.states[id])) {
          g.stopped_at = id;
          g.stats = {g.states.size(), 0, ms_since(t0)};
          return g;
        }
      }

      int workers = std::max(1, opts.workers);
      std::vector<Succ> succ;
      while (!frontier.empty()) {
        succ.assign(frontier.size(), {});
        auto work = [&](std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i) {
            expand(g.states[frontier[i]], succ[i]);
          }
        };
        if (workers == 1 || frontier.size() < 64) {
          work(0, frontier.size());
        } else {
          std::vector<std::thread> pool;
          std::size_t chunk = (frontier.size() + workers - 1) / workers;
          for (std::size_t lo = 0; lo < frontier.size(); lo += chunk) {
            pool.emplace_back(work, lo, std::min(frontier.size(), lo + chunk));
          }
          for (auto &th : pool) {
            th.join();
          }
        }

        std::vector<std::uint32_t> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
          std::uint32_t from = frontier[i];
          for (auto &[rule, c] : succ[i]) {
            ++g.stats.transitions;
            auto [id, fresh] = add(std::move(c), from, rule);
            if (keep_edges) {
              g.edges[from].emplace_back(rule, id);
            }
            if (!fresh) {
              continue;
            }
            next.push_back(id);
            if (stop && stop(g.states[id])) {
              g.stopped_at = id;
              g.stats.states = g.states.size();
              g.stats.wall_ms = ms_since(t0);
              return g;
            }
          }
        }
        frontier.swap(next);
      }
      g.stats.states = g.states.size();
      g.stats.wall_ms = ms_since(t0);
      return g;
    }

    Expand plain_expand(const Instance &inst) {
      return [&inst](const Configuration &c, Succ &out) {
        int nr = static_cast<int>(inst.model().rules.size());
        for (int r = 0; r < nr; ++r) {
          auto res = ta::apply_rule(inst, c, r);
          if (auto *next = std::get_if<Configuration>(&res)) {
            if (*next != c) {
              out.emplace_back(r, std::move(*next));
            }
          }
        }
      };
    }

    Trace path_to(const std::vector<Configuration> &states,
                  const std::vector<std::int64_t> &parent,
                  const std::vector<int> &via_rule,
                  std::size_t i,
                  std::size_t strip) {
      auto cut = [strip](Configuration c) {
        c.values.resize(c.values.size() - strip);
        return c;
      };
      std::vector<std::size_t> chain;
      for (auto k = static_cast<std::int64_t>(i); k >= 0;
           k = parent[static_cast<std::size_t>(k)]) {
        chain.push_back(static_cast<std::size_t>(k));
      }
      std::reverse(chain.begin(), chain.end());
      Trace t;
      t.initial = cut(states[chain.front()]);
      for (std::size_t k = 1; k < chain.size(); ++k) {
        t.steps.push_back({via_rule[chain[k]], cut(states[chain[k]])});
      }
      return t;
    }

    std::vector<Configuration> filter(const Instance &inst,
                                      const std::vector<Configuration> &cs,
                                      const ta::Prop &p,
                                      bool want) {
      auto cp = inst.compile(p);
      std::vector<Configuration> out;
      for (const auto &c : cs) {
        if (cp.eval(c) == want) {
          out.push_back(c);
        }
      }
      return out;
    }

    // Iterative Tarjan over the nodes with in_sub set; returns SCCs.
    std::vector<std::vector<std::uint32_t>> sccs(
        const Graph &g,
        const std::vector<char> &in_sub) {
      std::size_t n = g.states.size();
      constexpr std::uint32_t kUnset = ~0U;
      std::vector<std::uint32_t> index(n, kUnset), low(n, 0);
      std::vector<char> on_stack(n, 0);
      std::vector<std::uint32_t> stack;
      std::vector<std::vector<std::uint32_t>> out;
      std::uint32_t counter = 0;
      struct Frame {
        std::uint32_t v;
        std::size_t edge;
      };
      std::vector<Frame> call;
      for (std::uint32_t root = 0; root < n; ++root) {
        if (!in_sub[root] || index[root] != kUnset) {
          continue;
        }
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
          auto &fr = call.back();
          const auto &es = g.edges[fr.v];
          if (fr.edge < es.size()) {
            std::uint32_t w = es[fr.edge++].second;
            if (!in_sub[w]) {
              continue;
            }
            if (index[w] == kUnset) {
              index[w] = low[w] = counter++;
              stack.push_back(w);
              on_stack[w] = 1;
              call.push_back({w, 0});
            } else if (on_stack[w]) {
              low[fr.v] = std::min(low[fr.v], index[w]);
            }
            continue;
          }
          std::uint32_t v = fr.v;
          call.pop_back();
          if (!call.empty()) {
            low[call.back().v] = std::min(low[call.back().v], low[v]);
          }
          if (low[v] == index[v]) {
            std::vector<std::uint32_t> comp;
            std::uint32_t w = 0;
            do {
              w = stack.back();
              stack.pop_back();
              on_stack[w] = 0;
              comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            out.push_back(std::move(comp));
          }
        }
      }
      return out;
    }

    // Rules that the justice test concerns.
    std::vector<int> fairness_rules(const Instance &inst) {
      std::vector<int> out;
      const auto &rules = inst.model().rules;
      for (int r = 0; r < static_cast<int>(rules.size()); ++r) {
        if (!rules[static_cast<std::size_t>(r)].self_loop()) {
          out.push_back(r);
        }
      }
      return out;
    }

    bool justice_applicable(const Instance &inst,
                            const Configuration &c,
                            int rule,
                            JusticeGuards j) {
      return j == JusticeGuards::as_written
                 ? ta::applicable(inst, c, rule)
                 : ta::applicable_without_faulty(inst, c, rule);
    }

    Configuration strip(Configuration c, std::size_t k) {
      c.values.resize(c.values.size() - k);
      return c;
    }

  }  // namespace

  std::optional<std::size_t> ReachResult::find(const Configuration &c) const {
    auto r = StateStore::find_in(states, slots, c);
    if (!r) {
      return std::nullopt;
    }
    return *r;
  }

  Trace ReachResult::trace_to(std::size_t i) const {
    return path_to(states, parent, via_rule, i, 0);
  }

  ReachResult reach(const Instance &inst,
                    const std::vector<Configuration> &inits,
                    const Options &opts) {
    Graph g = bfs(inits, plain_expand(inst), false, opts, {});
    ReachResult r;
    r.states = std::move(g.states);
    r.slots = std::move(g.slots);
    r.parent = std::move(g.parent);
    r.via_rule = std::move(g.via_rule);
    r.stats = g.stats;
    return r;
  }

  ReachResult reach(const Instance &inst, const Options &opts) {
    return reach(inst, inst.initial_configurations(), opts);
  }

  Verdict check_invariant(const Instance &inst,
                          const ta::Prop &p,
                          const std::vector<Configuration> &inits,
                          const Options &opts) {
    auto cp = inst.compile(p);
    Graph g = bfs(inits, plain_expand(inst), false, opts,
                  [&](const Configuration &c) { return !cp.eval(c); });
    Verdict v;
    v.stats = g.stats;
    if (g.stopped_at) {
      v.kind = Verdict::Kind::violated;
      v.witness = path_to(g.states, g.parent, g.via_rule, *g.stopped_at, 0);
    }
    return v;
  }

  Verdict check_invariant(const Instance &inst,
                          const ta::Prop &p,
                          const Options &opts) {
    return check_invariant(inst, p, inst.initial_configurations(), opts);
  }

  Verdict check_liveness(const Instance &inst,
                         const ta::SpecFormula &spec,
                         const std::vector<Configuration> &inits,
                         const Options &opts) {
    auto trigger = inst.compile(spec.trigger);
    auto goal = inst.compile(spec.goal);
    const auto &rules = inst.model().rules;

    // Product with a monotone bit recording that the trigger was seen.
    std::vector<Configuration> starts;
    for (auto c : filter(inst, inits, spec.init, true)) {
      int seen = trigger.eval(c) ? 1 : 0;
      c.values.push_back(seen);
      starts.push_back(std::move(c));
    }
    Expand expand = [&](const Configuration &pc, Succ &out) {
      Configuration c = strip(pc, 1);
      int seen = pc.values.back();
      for (int r = 0; r < static_cast<int>(rules.size()); ++r) {
        if (rules[static_cast<std::size_t>(r)].self_loop()) {
          continue;
        }
        auto res = ta::apply_rule(inst, c, r);
        if (auto *next = std::get_if<Configuration>(&res)) {
          int s = seen != 0 || trigger.eval(*next) ? 1 : 0;
          next->values.push_back(s);
          out.emplace_back(r, std::move(*next));
        }
      }
    };
    Graph g = bfs(starts, expand, true, opts, {});

    Verdict v;
    v.stats = g.stats;
    std::size_t n = g.states.size();
    std::vector<char> in_sub(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto &pc = g.states[i];
      in_sub[i] = pc.values.back() != 0 && !goal.eval(strip(pc, 1));
    }

    auto fair_rules = fairness_rules(inst);
    const std::vector<std::uint32_t> *found = nullptr;
    auto comps = sccs(g, in_sub);
    std::vector<char> in_comp(n, 0);
    for (const auto &comp : comps) {
      for (auto u : comp) {
        in_comp[u] = 1;
      }
      bool fair = true;
      for (int r : fair_rules) {
        bool everywhere = std::all_of(comp.begin(), comp.end(), [&](auto u) {
          return justice_applicable(inst, strip(g.states[u], 1), r,
                                    opts.justice);
        });
        if (!everywhere) {
          continue;
        }
        bool taken = std::any_of(comp.begin(), comp.end(), [&](auto u) {
          return std::any_of(g.edges[u].begin(), g.edges[u].end(),
                             [&](const auto &e) {
                               return e.first == r && in_comp[e.second];
                             });
        });
        if (!taken) {
          fair = false;
          break;
        }
      }
      for (auto u : comp) {
        in_comp[u] = 0;
      }
      if (fair && (found == nullptr || comp.front() < found->front())) {
        found = &comp;
      }
    }
    if (found == nullptr) {
      return v;
    }

    // Witness: reach the component's first node, then walk a closed tour
    // through every node and one edge per rule used inside the component.
    const auto &comp = *found;
    for (auto u : comp) {
      in_comp[u] = 1;
    }
    std::uint32_t s0 = comp.front();
    Lasso lasso;
    lasso.prefix = path_to(g.states, g.parent, g.via_rule, s0, 1);

    auto shortest = [&](std::uint32_t from, std::uint32_t to) {
      // BFS inside the component; returns (rule, node) steps.
      std::vector<std::pair<int, std::uint32_t>> steps;
      if (from == to) {
        return steps;
      }
      std::unordered_map<std::uint32_t, std::pair<std::uint32_t, int>> prev;
      std::vector<std::uint32_t> q{from};
      prev[from] = {from, kStutter};
      for (std::size_t h = 0; h < q.size(); ++h) {
        auto u = q[h];
        if (u == to) {
          break;
        }
        for (const auto &[r, w] : g.edges[u]) {
          if (in_comp[w] && !prev.contains(w)) {
            prev[w] = {u, r};
            q.push_back(w);
          }
        }
      }
      for (auto x = to; x != from; x = prev[x].first) {
        steps.emplace_back(prev[x].second, x);
      }
      std::reverse(steps.begin(), steps.end());
      return steps;
    };

    std::uint32_t cur = s0;
    auto walk = [&](std::uint32_t to) {
      for (const auto &[r, w] : shortest(cur, to)) {
        lasso.cycle.push_back({r, strip(g.states[w], 1)});
      }
      cur = to;
    };
    std::vector<int> covered;
    for (auto u : comp) {
      for (const auto &[r, w] : g.edges[u]) {
        if (!in_comp[w] ||
            std::find(covered.begin(), covered.end(), r) != covered.end()) {
          continue;
        }
        covered.push_back(r);
        walk(u);
        lasso.cycle.push_back({r, strip(g.states[w], 1)});
        cur = w;
      }
    }
    for (auto u : comp) {
      walk(u);
    }
    walk(s0);
    if (lasso.cycle.empty()) {
      Configuration c = strip(g.states[s0], 1);
      int step = kStutter;
      for (int r = 0; r < static_cast<int>(rules.size()); ++r) {
        if (rules[static_cast<std::size_t>(r)].self_loop() &&
            ta::applicable(inst, c, r)) {
          step = r;
          break;
        }
      }
      lasso.cycle.push_back({step, c});
    }
    v.kind = Verdict::Kind::violated;
    v.witness = std::move(lasso);
    return v;
  }

  Verdict check_liveness(const Instance &inst,
                         const ta::SpecFormula &spec,
                         const Options &opts) {
    return check_liveness(inst, spec, inst.initial_configurations(), opts);
  }

  Verdict check_spec(const Instance &inst,
                     const ta::SpecFormula &spec,
                     const Options &opts) {
    auto inits = inst.initial_configurations();
    switch (spec.kind) {
      case ta::SpecFormula::Kind::invariant:
        return check_invariant(inst, spec.goal,
                               filter(inst, inits, spec.init, true), opts);
      case ta::SpecFormula::Kind::event_implication:
        // From any start where init is false, the trigger must stay false.
        return check_invariant(inst, ta::Prop::negate(spec.trigger),
                               filter(inst, inits, spec.init, false), opts);
      case ta::SpecFormula::Kind::liveness:
        return check_liveness(inst, spec, inits, opts);
    }
    return {};
  }

  std::vector<const ta::SpecFormula *> select_specs(
      const ta::ThresholdAutomatonModel &m,
      const std::string &selector) {
    std::vector<const ta::SpecFormula *> out;
    for (const auto &s : m.specs) {
      bool match = selector == "all" || s.name == selector;
      if (!match && s.name.size() == selector.size() + 1 &&
          s.name.starts_with(selector)) {
        char d = s.name.back();
        match = d >= '0' && d <= '9';
      }
      if (match) {
        out.push_back(&s);
      }
    }
    return out;
  }

  namespace {

    std::optional<std::string> replay_steps(const Instance &inst,
                                            Configuration cur,
                                            const std::vector<Step> &steps,
                                            std::size_t offset) {
      int nr = static_cast<int>(inst.model().rules.size());
      for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto &s = steps[i];
        std::string where = "step " + std::to_string(offset + i + 1);
        if (s.rule == kStutter) {
          if (s.after != cur) {
            return where + ": stutter changes the configuration";
          }
          continue;
        }
        if (s.rule < 0 || s.rule >= nr) {
          return where + ": unknown rule index " + std::to_string(s.rule);
        }
        auto res = ta::apply_rule(inst, cur, s.rule);
        if (auto *why = std::get_if<ta::Inapplicable>(&res)) {
          return where + ": rule " +
                 inst.model().rules[static_cast<std::size_t>(s.rule)].id +
                 " not applicable (" + ta::to_string(*why) + ")";
        }
        if (std::get<Configuration>(res) != s.after) {
          return where + ": recorded configuration differs from replay";
        }
        cur = s.after;
      }
      return std::nullopt;
    }

  }  // namespace

  std::optional<std::string> replay_trace(const Instance &inst,
                                          const Trace &t) {
    auto width = static_cast<std::size_t>(inst.num_locations() +
                                          inst.num_shared());
    if (t.initial.values.size() != width) {
      return std::string("initial configuration has wrong width");
    }
    long sum = 0;
    for (int i = 0; i < inst.num_locations(); ++i) {
      if (t.initial.kappa(i) < 0) {
        return std::string("negative counter in initial configuration");
      }
      sum += t.initial.kappa(i);
    }
    if (sum != inst.params().correct()) {
      return std::string("initial configuration does not hold n - f processes");
    }
    for (int x = 0; x < inst.num_shared(); ++x) {
      if (t.initial.values[static_cast<std::size_t>(inst.shared_slot(x))] != 0) {
        return std::string("shared variables must start at zero");
      }
    }
    for (const auto &s : t.steps) {
      if (s.after.values.size() != width) {
        return std::string("step configuration has wrong width");
      }
    }
    return replay_steps(inst, t.initial, t.steps, 0);
  }

  std::optional<std::string> replay_lasso(const Instance &inst,
                                          const Lasso &l,
                                          JusticeGuards justice) {
    if (auto e = replay_trace(inst, l.prefix)) {
      return e;
    }
    if (l.cycle.empty()) {
      return std::string("empty cycle");
    }
    const Configuration &start = l.prefix.last();
    if (auto e = replay_steps(inst, start, l.cycle, l.prefix.steps.size())) {
      return e;
    }
    if (l.cycle.back().after != start) {
      return std::string("cycle does not return to its first configuration");
    }
    for (int r : fairness_rules(inst)) {
      bool everywhere = std::all_of(l.cycle.begin(), l.cycle.end(),
                                    [&](const Step &s) {
                                      return justice_applicable(
                                          inst, s.after, r, justice);
                                    });
      bool fired = std::any_of(l.cycle.begin(), l.cycle.end(),
                               [&](const Step &s) { return s.rule == r; });
      if (everywhere && !fired) {
        return "unfair cycle: rule " +
               inst.model().rules[static_cast<std::size_t>(r)].id +
               " is always applicable but never fires";
      }
    }
    return std::nullopt;
  }

}  // namespace bftmc::check
