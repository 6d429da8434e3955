/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_CHECKER_HPP
#define BFTMC_CHECKER_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bftmc/ta.hpp"

namespace bftmc::check {

  using ta::Configuration;
  using ta::Instance;

  inline constexpr std::uint64_t kDefaultStateBudget = 10'000'000;

  /// kDefaultStateBudget unless BFTMC_STATE_BUDGET holds a positive integer.
  std::uint64_t state_budget_from_env();

  /**
   * When a rule counts as continuously applicable for justice. With
   * correct_only the guard is read with f = 0, so a cycle may starve a rule
   * that only Byzantine messages could enable; with as_written the +f slack
   * counts, which assumes the faulty processes always send.
   */
  enum class JusticeGuards : std::uint8_t { correct_only, as_written };

  struct Options {
    std::uint64_t state_budget = kDefaultStateBudget;
    int workers = 1;
    JusticeGuards justice = JusticeGuards::as_written;
  };

  /// The explored state count would exceed Options::state_budget.
  class ResourceError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  struct Stats {
    std::uint64_t states = 0;
    std::uint64_t transitions = 0;
    double wall_ms = 0;

    Stats &operator+=(const Stats &o) {
      states += o.states;
      transitions += o.transitions;
      wall_ms += o.wall_ms;
      return *this;
    }
  };

  /// Rule index fired by a step; kStutter marks a step that changes nothing.
  inline constexpr int kStutter = -1;

  struct Step {
    int rule = kStutter;
    Configuration after;
    friend bool operator==(const Step &, const Step &) = default;
  };

  struct Trace {
    Configuration initial;
    std::vector<Step> steps;

    const Configuration &last() const {
      return steps.empty() ? initial : steps.back().after;
    }
    friend bool operator==(const Trace &, const Trace &) = default;
  };

  /// prefix, then cycle repeated forever; the cycle ends where it starts.
  struct Lasso {
    Trace prefix;
    std::vector<Step> cycle;
    friend bool operator==(const Lasso &, const Lasso &) = default;
  };

  using Witness = std::variant<Trace, Lasso>;

  struct Verdict {
    enum class Kind : std::uint8_t { holds, violated, unknown_at_bound };
    Kind kind = Kind::holds;
    Stats stats;
    std::optional<Witness> witness;

    bool holds() const {
      return kind == Kind::holds;
    }
    bool violated() const {
      return kind == Kind::violated;
    }
  };

  const char *to_string(Verdict::Kind k);

  /// Breadth-first reachable set with parent pointers for witness recovery.
  struct ReachResult {
    std::vector<Configuration> states;
    /// parent[i] == -1 for initial configurations.
    std::vector<std::int64_t> parent;
    std::vector<int> via_rule;
    Stats stats;

    std::optional<std::size_t> find(const Configuration &c) const;
    Trace trace_to(std::size_t i) const;

    // Open-addressing index over `states`: slot holds index + 1, 0 if empty.
    std::vector<std::uint32_t> slots;
  };

  /**
   * BFS closure of `inits` under apply_rule over every rule, layer by layer,
   * expanding the frontier with `opts.workers` threads. Results do not
   * depend on the worker count. Throws ResourceError past the budget.
   */
  ReachResult reach(const Instance &inst,
                    const std::vector<Configuration> &inits,
                    const Options &opts = {});

  /// reach() from every admissible initial configuration.
  ReachResult reach(const Instance &inst, const Options &opts = {});

  /**
   * Holds iff `p` is true in every configuration reachable from `inits`.
   * A violation carries a shortest trace (ties broken by lowest rule index).
   */
  Verdict check_invariant(const Instance &inst,
                          const ta::Prop &p,
                          const std::vector<Configuration> &inits,
                          const Options &opts = {});
  Verdict check_invariant(const Instance &inst,
                          const ta::Prop &p,
                          const Options &opts = {});

  /**
   * Liveness under justice: a rule applicable (per opts.justice) at every
   * configuration of a cycle, self-loop rules excepted, must fire within
   * the cycle; stuttering
   * is allowed. Violated iff some fair lasso starting in a configuration
   * satisfying spec.init, having seen spec.trigger, has spec.goal false at
   * every configuration of its cycle.
   */
  Verdict check_liveness(const Instance &inst,
                         const ta::SpecFormula &spec,
                         const std::vector<Configuration> &inits,
                         const Options &opts = {});
  Verdict check_liveness(const Instance &inst,
                         const ta::SpecFormula &spec,
                         const Options &opts = {});

  /// Dispatches on the spec kind over every admissible initial configuration.
  Verdict check_spec(const Instance &inst,
                     const ta::SpecFormula &spec,
                     const Options &opts = {});

  /**
   * Specs named `selector`, or the family `selector<digit>` (so
   * "obligation" selects obligation0 and obligation1). "all" selects every
   * spec. Empty when nothing matches.
   */
  std::vector<const ta::SpecFormula *> select_specs(
      const ta::ThresholdAutomatonModel &m,
      const std::string &selector);

  /// Why a witness fails to replay; nullopt when it replays.
  std::optional<std::string> replay_trace(const Instance &inst,
                                          const Trace &t);
  /// Replays prefix and cycle, checks closure and the justice condition.
  std::optional<std::string> replay_lasso(
      const Instance &inst,
      const Lasso &l,
      JusticeGuards justice = JusticeGuards::as_written);

}  // namespace bftmc::check

#endif  // BFTMC_CHECKER_HPP
