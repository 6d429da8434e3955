/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_TA_HPP
#define BFTMC_TA_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bftmc/core.hpp"

namespace bftmc::ta {

  enum class TermKind : std::uint8_t { location, shared, param };

  struct Term {
    TermKind kind;
    int index;
    friend auto operator<=>(const Term &, const Term &) = default;
  };

  /// sum(coeffs[x] * x) + constant
  struct LinearExpr {
    std::map<Term, long> coeffs;
    long constant = 0;

    bool is_constant() const {
      return coeffs.empty();
    }
    LinearExpr &operator+=(const LinearExpr &o);
    LinearExpr &operator*=(long k);
    friend bool operator==(const LinearExpr &, const LinearExpr &) = default;
  };

  LinearExpr operator-(LinearExpr a, const LinearExpr &b);

  enum class Rel : std::uint8_t { ge, lt };

  /// expr >= 0 or expr < 0.
  struct LinearConstraint {
    LinearExpr expr;
    Rel rel = Rel::ge;
    friend bool operator==(const LinearConstraint &,
                           const LinearConstraint &) = default;
  };

  /// Conjunction; empty means true.
  using Guard = std::vector<LinearConstraint>;

  /// Boolean combination of linear atoms, used by specs and resilience.
  struct Prop {
    enum class Kind : std::uint8_t { constant, atom, negation, conj, disj };
    Kind kind = Kind::constant;
    bool value = true;
    LinearConstraint atom;
    std::vector<Prop> kids;

    static Prop truth(bool v = true);
    static Prop of(LinearConstraint c);
    static Prop negate(Prop p);
    static Prop all(std::vector<Prop> ps);
    static Prop any(std::vector<Prop> ps);

    bool is_true() const {
      return kind == Kind::constant && value;
    }
    friend bool operator==(const Prop &, const Prop &) = default;
  };

  /**
   * Every spec has the shape  init -> fair -> (<>trigger -> <>goal)  with
   * unused parts set to true:
   *   invariant           [](goal)
   *   event_implication   (<>trigger) -> init      (init read at time 0)
   *   liveness            init -> fair -> [<>trigger ->] <>goal
   */
  struct SpecFormula {
    enum class Kind : std::uint8_t { invariant, event_implication, liveness };
    std::string name;
    Kind kind = Kind::invariant;
    Prop init = Prop::truth();
    Prop trigger = Prop::truth();
    Prop goal = Prop::truth();
    friend bool operator==(const SpecFormula &,
                           const SpecFormula &) = default;
  };

  struct Rule {
    std::string id;
    int from = 0;
    int to = 0;
    Guard guard;
    std::vector<int> updates;  // shared variables incremented by one

    bool self_loop() const {
      return from == to;
    }
  };

  struct ThresholdAutomatonModel {
    std::string name;
    std::vector<std::string> params;
    Prop resilience = Prop::truth();
    std::vector<std::string> shared;
    std::vector<std::string> locations;
    std::vector<int> initial;
    std::vector<Rule> rules;
    std::vector<SpecFormula> specs;

    std::optional<int> location_index(const std::string &name) const;
    std::optional<int> shared_index(const std::string &name) const;
    std::optional<int> param_index(const std::string &name) const;
    std::optional<int> rule_index(const std::string &id) const;
    const SpecFormula *spec(const std::string &name) const;
    std::string term_name(const Term &t) const;
  };

  /// A positioned model diagnostic; line/column are 1-based, 0 if unknown.
  struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;
    /// Rule id or spec name the diagnostic is about, when there is one.
    std::string subject{};
    std::string to_string() const;
  };

  /**
   * Structural checks: parameters are exactly {n, t, f}, names unique,
   * references in range, guards mention only shared variables and
   * parameters, self-loops have no updates, initial set non-empty, and no
   * path from an initial location increments a shared variable twice.
   */
  std::vector<Diagnostic> validate(const ThresholdAutomatonModel &m);

  /// Thrown when a model fails validation or instantiation.
  class ModelError : public std::runtime_error {
   public:
    explicit ModelError(std::vector<Diagnostic> diags);
    const std::vector<Diagnostic> &diagnostics() const {
      return diags_;
    }

   private:
    std::vector<Diagnostic> diags_;
  };

  /**
   * Counter-system state: count of correct processes per location followed
   * by the shared-variable values, in model declaration order.
   */
  struct Configuration {
    std::vector<int> values;

    int kappa(int loc) const {
      return values[static_cast<std::size_t>(loc)];
    }
    friend auto operator<=>(const Configuration &,
                            const Configuration &) = default;
  };

  struct ConfigurationHash {
    std::size_t operator()(const Configuration &c) const noexcept;
  };

  /// A constraint with parameters folded in; indices address Configuration.
  struct CompiledConstraint {
    std::vector<std::pair<int, long>> terms;
    long constant = 0;
    Rel rel = Rel::ge;

    bool eval(const Configuration &c) const {
      long v = constant;
      for (const auto &[i, k] : terms) {
        v += k * c.values[static_cast<std::size_t>(i)];
      }
      return rel == Rel::ge ? v >= 0 : v < 0;
    }
  };

  struct CompiledProp {
    Prop::Kind kind = Prop::Kind::constant;
    bool value = true;
    CompiledConstraint atom;
    std::vector<CompiledProp> kids;

    bool eval(const Configuration &c) const;
  };

  /**
   * A model bound to concrete parameter values. Immutable and cheap to
   * share between checker workers.
   */
  class Instance {
   public:
    /// Throws ModelError on invalid models, std::invalid_argument when the
    /// parameters or the model's resilience condition are violated and
    /// allow_unsafe is not set.
    Instance(std::shared_ptr<const ThresholdAutomatonModel> model,
             Params params,
             bool allow_unsafe = false);

    const ThresholdAutomatonModel &model() const {
      return *model_;
    }
    std::shared_ptr<const ThresholdAutomatonModel> model_ptr() const {
      return model_;
    }
    const Params &params() const {
      return params_;
    }
    int num_locations() const {
      return static_cast<int>(model_->locations.size());
    }
    int num_shared() const {
      return static_cast<int>(model_->shared.size());
    }
    int shared_slot(int var) const {
      return num_locations() + var;
    }

    CompiledConstraint compile(const LinearConstraint &c) const;
    CompiledProp compile(const Prop &p) const;
    const std::vector<CompiledConstraint> &rule_guard(int rule) const {
      return guards_[static_cast<std::size_t>(rule)];
    }
    /// The rule's guard with f = 0: what correct processes alone guarantee.
    const std::vector<CompiledConstraint> &rule_guard_without_faulty(
        int rule) const {
      return silent_guards_[static_cast<std::size_t>(rule)];
    }

    Configuration empty_configuration() const;
    /// All splits of the n - f correct processes over the initial locations.
    std::vector<Configuration> initial_configurations() const;

   private:
    std::shared_ptr<const ThresholdAutomatonModel> model_;
    Params params_;
    std::vector<long> param_values_;
    std::vector<std::vector<CompiledConstraint>> guards_;
    std::vector<std::vector<CompiledConstraint>> silent_guards_;
  };

  bool eval_guard(const Instance &inst,
                  const Guard &g,
                  const Configuration &c);
  bool eval_rule_guard(const Instance &inst, int rule, const Configuration &c);
  bool eval_prop(const Instance &inst, const Prop &p, const Configuration &c);

  enum class Inapplicable : std::uint8_t { empty_source, guard_false };

  const char *to_string(Inapplicable why);

  using ApplyResult = std::variant<Configuration, Inapplicable>;

  ApplyResult apply_rule(const Instance &inst,
                         const Configuration &c,
                         int rule);

  /// True when the rule could fire: source occupied and guard holds.
  bool applicable(const Instance &inst, const Configuration &c, int rule);

  /// Source occupied and the guard holds even if the faulty stay silent.
  bool applicable_without_faulty(const Instance &inst,
                                 const Configuration &c,
                                 int rule);

  // Rendering helpers shared by the serializer and the trace writer.
  std::string render(const ThresholdAutomatonModel &m, const LinearConstraint &c);
  std::string render(const ThresholdAutomatonModel &m, const Guard &g);
  std::string render(const ThresholdAutomatonModel &m, const Prop &p);
  /// "from -> to when (guard) do (updates)"
  std::string render_rule(const ThresholdAutomatonModel &m, const Rule &r);

}  // namespace bftmc::ta

#endif  // BFTMC_TA_HPP
