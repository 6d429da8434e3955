/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/ta.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace bftmc::ta {

  LinearExpr &LinearExpr::operator+=(const LinearExpr &o) {
    for (const auto &[t, k] : o.coeffs) {
      auto &slot = coeffs[t];
      slot += k;
      if (slot == 0) {
        coeffs.erase(t);
      }
    }
    constant += o.constant;
    return *this;
  }

  LinearExpr &LinearExpr::operator*=(long k) {
    if (k == 0) {
      coeffs.clear();
    }
    for (auto &[t, c] : coeffs) {
      c *= k;
    }
    constant *= k;
    return *this;
  }

  LinearExpr operator-(LinearExpr a, const LinearExpr &b) {
    LinearExpr nb = b;
    nb *= -1;
    a += nb;
    return a;
  }

  Prop Prop::truth(bool v) {
    Prop p;
    p.kind = Kind::constant;
    p.value = v;
    return p;
  }

  Prop Prop::of(LinearConstraint c) {
    Prop p;
    p.kind = Kind::atom;
    p.atom = std::move(c);
    return p;
  }

  Prop Prop::negate(Prop q) {
    Prop p;
    p.kind = Kind::negation;
    p.kids.push_back(std::move(q));
    return p;
  }

  Prop Prop::all(std::vector<Prop> ps) {
    if (ps.size() == 1) {
      return std::move(ps.front());
    }
    if (ps.empty()) {
      return truth(true);
    }
    Prop p;
    p.kind = Kind::conj;
    p.kids = std::move(ps);
    return p;
  }

  Prop Prop::any(std::vector<Prop> ps) {
    if (ps.size() == 1) {
      return std::move(ps.front());
    }
    if (ps.empty()) {
      return truth(false);
    }
    Prop p;
    p.kind = Kind::disj;
    p.kids = std::move(ps);
    return p;
  }

  namespace {

    std::optional<int> find_name(const std::vector<std::string> &names,
                                 const std::string &name) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) {
        return std::nullopt;
      }
      return static_cast<int>(it - names.begin());
    }

  }  // namespace

  std::optional<int> ThresholdAutomatonModel::location_index(
      const std::string &name) const {
    return find_name(locations, name);
  }
  std::optional<int> ThresholdAutomatonModel::shared_index(
      const std::string &name) const {
    return find_name(shared, name);
  }
  std::optional<int> ThresholdAutomatonModel::param_index(
      const std::string &name) const {
    return find_name(params, name);
  }
  std::optional<int> ThresholdAutomatonModel::rule_index(
      const std::string &id) const {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (rules[i].id == id) {
        return static_cast<int>(i);
      }
    }
    return std::nullopt;
  }

  const SpecFormula *ThresholdAutomatonModel::spec(
      const std::string &name) const {
    for (const auto &s : specs) {
      if (s.name == name) {
        return &s;
      }
    }
    return nullptr;
  }

  std::string ThresholdAutomatonModel::term_name(const Term &t) const {
    const std::vector<std::string> *names = nullptr;
    switch (t.kind) {
      case TermKind::location:
        names = &locations;
        break;
      case TermKind::shared:
        names = &shared;
        break;
      case TermKind::param:
        names = &params;
        break;
    }
    if (t.index < 0 || t.index >= static_cast<int>(names->size())) {
      return "?" + std::to_string(t.index);
    }
    return (*names)[static_cast<std::size_t>(t.index)];
  }

  std::string Diagnostic::to_string() const {
    if (line == 0) {
      return message;
    }
    return std::to_string(line) + ":" + std::to_string(column) + ": "
        + message;
  }

  namespace {

    std::string join_diags(const std::vector<Diagnostic> &d) {
      std::string out;
      for (const auto &x : d) {
        if (!out.empty()) {
          out += "\n";
        }
        out += x.to_string();
      }
      return out;
    }

    void check_terms(const ThresholdAutomatonModel &m,
                     const LinearExpr &e,
                     bool allow_locations,
                     const std::string &where,
                     std::vector<Diagnostic> &out) {
      for (const auto &[t, k] : e.coeffs) {
        std::size_t bound = 0;
        switch (t.kind) {
          case TermKind::location:
            bound = m.locations.size();
            if (!allow_locations) {
              out.push_back({0, 0, where + ": guard mentions location '"
                                 + m.term_name(t) + "'"});
            }
            break;
          case TermKind::shared:
            bound = m.shared.size();
            break;
          case TermKind::param:
            bound = m.params.size();
            break;
        }
        if (t.index < 0 || static_cast<std::size_t>(t.index) >= bound) {
          out.push_back({0, 0, where + ": unknown identifier"});
        }
      }
    }

    void check_prop(const ThresholdAutomatonModel &m,
                    const Prop &p,
                    bool allow_locations,
                    bool allow_shared,
                    const std::string &where,
                    std::vector<Diagnostic> &out) {
      if (p.kind == Prop::Kind::atom) {
        check_terms(m, p.atom.expr, allow_locations, where, out);
        if (!allow_shared) {
          for (const auto &[t, k] : p.atom.expr.coeffs) {
            if (t.kind == TermKind::shared) {
              out.push_back({0, 0, where + ": mentions shared variable"});
            }
          }
        }
      }
      for (const auto &k : p.kids) {
        check_prop(m, k, allow_locations, allow_shared, where, out);
      }
    }

  }  // namespace

  ModelError::ModelError(std::vector<Diagnostic> diags)
      : std::runtime_error(join_diags(diags)), diags_(std::move(diags)) {}

  std::vector<Diagnostic> validate(const ThresholdAutomatonModel &m) {
    std::vector<Diagnostic> out;
    std::vector<std::string> ps = m.params;
    std::sort(ps.begin(), ps.end());
    if (ps != std::vector<std::string>{"f", "n", "t"}) {
      out.push_back({0, 0, "parameters must be exactly n, t, f"});
    }
    if (m.locations.empty()) {
      out.push_back({0, 0, "no locations declared"});
    }
    std::set<std::string> names;
    auto unique = [&](const std::vector<std::string> &v, const char *what) {
      for (const auto &s : v) {
        if (!names.insert(s).second) {
          out.push_back({0, 0, std::string("duplicate ") + what + " '" + s
                                   + "'"});
        }
      }
    };
    unique(m.params, "parameter");
    unique(m.shared, "shared variable");
    unique(m.locations, "location");

    if (m.initial.empty() && !m.locations.empty()) {
      out.push_back({0, 0, "no initial locations declared"});
    }
    auto nloc = static_cast<int>(m.locations.size());
    for (int i : m.initial) {
      if (i < 0 || i >= nloc) {
        out.push_back({0, 0, "initial location out of range"});
      }
    }
    check_prop(m, m.resilience, false, false, "resilience", out);

    std::set<std::string> rule_ids;
    for (const auto &r : m.rules) {
      std::string where = "rule " + r.id;
      if (!rule_ids.insert(r.id).second) {
        out.push_back({0, 0, "duplicate rule id '" + r.id + "'", r.id});
      }
      if (r.from < 0 || r.from >= nloc || r.to < 0 || r.to >= nloc) {
        out.push_back({0, 0, where + ": location out of range", r.id});
        continue;
      }
      if (r.self_loop() && !r.updates.empty()) {
        out.push_back({0, 0, where + ": self-loop with updates", r.id});
      }
      for (const auto &c : r.guard) {
        check_terms(m, c.expr, false, where, out);
      }
      std::set<int> seen;
      for (int u : r.updates) {
        if (u < 0 || u >= static_cast<int>(m.shared.size())) {
          out.push_back({0, 0, where + ": update of unknown variable", r.id});
        } else if (!seen.insert(u).second) {
          out.push_back({0, 0,
                         where + ": variable '" + m.shared[u]
                             + "' incremented twice on one rule",
                         r.id});
        }
      }
    }
    for (const auto &s : m.specs) {
      std::string where = "spec " + s.name;
      check_prop(m, s.init, true, true, where, out);
      check_prop(m, s.trigger, true, true, where, out);
      check_prop(m, s.goal, true, true, where, out);
    }
    if (!out.empty()) {
      return out;
    }

    // Every simple path from an initial location increments each shared
    // variable at most once.
    std::vector<std::vector<int>> succ(static_cast<std::size_t>(nloc));
    for (std::size_t i = 0; i < m.rules.size(); ++i) {
      if (!m.rules[i].self_loop()) {
        succ[static_cast<std::size_t>(m.rules[i].from)].push_back(
            static_cast<int>(i));
      }
    }
    std::vector<int> incs(m.shared.size(), 0);
    std::vector<char> on_path(static_cast<std::size_t>(nloc), 0);
    std::set<std::string> reported;
    std::function<void(int)> dfs = [&](int loc) {
      on_path[static_cast<std::size_t>(loc)] = 1;
      for (int ri : succ[static_cast<std::size_t>(loc)]) {
        const auto &r = m.rules[static_cast<std::size_t>(ri)];
        if (on_path[static_cast<std::size_t>(r.to)]) {
          continue;
        }
        bool twice = false;
        for (int u : r.updates) {
          if (++incs[static_cast<std::size_t>(u)] > 1) {
            twice = true;
            if (reported.insert(m.shared[u]).second) {
              out.push_back({0, 0,
                             "shared variable '" + m.shared[u]
                                 + "' incremented twice on a path (rule "
                                 + r.id + ")",
                             r.id});
            }
          }
        }
        if (!twice) {
          dfs(r.to);
        }
        for (int u : r.updates) {
          --incs[static_cast<std::size_t>(u)];
        }
      }
      on_path[static_cast<std::size_t>(loc)] = 0;
    };
    for (int i : m.initial) {
      dfs(i);
    }
    return out;
  }

  std::size_t ConfigurationHash::operator()(
      const Configuration &c) const noexcept {
    // FNV-1a over the fixed-width encoding.
    std::uint64_t h = 1469598103934665603ULL;
    for (int v : c.values) {
      auto u = static_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) {
        h ^= (u >> (8 * b)) & 0xffU;
        h *= 1099511628211ULL;
      }
    }
    return static_cast<std::size_t>(h);
  }

  bool CompiledProp::eval(const Configuration &c) const {
    switch (kind) {
      case Prop::Kind::constant:
        return value;
      case Prop::Kind::atom:
        return atom.eval(c);
      case Prop::Kind::negation:
        return !kids.front().eval(c);
      case Prop::Kind::conj:
        return std::all_of(kids.begin(), kids.end(), [&](const auto &k) {
          return k.eval(c);
        });
      case Prop::Kind::disj:
        return std::any_of(kids.begin(), kids.end(), [&](const auto &k) {
          return k.eval(c);
        });
    }
    return false;
  }

  Instance::Instance(std::shared_ptr<const ThresholdAutomatonModel> model,
                     Params params,
                     bool allow_unsafe)
      : model_(std::move(model)), params_(params) {
    auto diags = validate(*model_);
    if (!diags.empty()) {
      throw ModelError(std::move(diags));
    }
    if (auto bad = validate_params(params_, allow_unsafe)) {
      throw std::invalid_argument("invalid parameters (n=" + std::to_string(params_.n)
                                  + ", t=" + std::to_string(params_.t)
                                  + ", f=" + std::to_string(params_.f)
                                  + "): " + *bad);
    }
    for (const auto &name : model_->params) {
      param_values_.push_back(name == "n" ? params_.n
                                  : name == "t" ? params_.t
                                                : params_.f);
    }
    if (!allow_unsafe && !compile(model_->resilience).eval(Configuration{})) {
      throw std::invalid_argument("resilience condition "
                                  + render(*model_, model_->resilience)
                                  + " fails");
    }
    for (const auto &r : model_->rules) {
      std::vector<CompiledConstraint> g;
      for (const auto &c : r.guard) {
        g.push_back(compile(c));
      }
      guards_.push_back(std::move(g));
    }
    // Same guards with the faulty processes contributing nothing.
    auto saved = param_values_;
    for (std::size_t i = 0; i < model_->params.size(); ++i) {
      if (model_->params[i] == "f") {
        param_values_[i] = 0;
      }
    }
    for (const auto &r : model_->rules) {
      std::vector<CompiledConstraint> g;
      for (const auto &c : r.guard) {
        g.push_back(compile(c));
      }
      silent_guards_.push_back(std::move(g));
    }
    param_values_ = std::move(saved);
  }

  CompiledConstraint Instance::compile(const LinearConstraint &c) const {
    CompiledConstraint out;
    out.rel = c.rel;
    out.constant = c.expr.constant;
    for (const auto &[t, k] : c.expr.coeffs) {
      switch (t.kind) {
        case TermKind::param:
          out.constant += k * param_values_[static_cast<std::size_t>(t.index)];
          break;
        case TermKind::location:
          out.terms.emplace_back(t.index, k);
          break;
        case TermKind::shared:
          out.terms.emplace_back(shared_slot(t.index), k);
          break;
      }
    }
    return out;
  }

  CompiledProp Instance::compile(const Prop &p) const {
    CompiledProp out;
    out.kind = p.kind;
    out.value = p.value;
    if (p.kind == Prop::Kind::atom) {
      out.atom = compile(p.atom);
    }
    for (const auto &k : p.kids) {
      out.kids.push_back(compile(k));
    }
    return out;
  }

  Configuration Instance::empty_configuration() const {
    return Configuration{
        std::vector<int>(static_cast<std::size_t>(num_locations() + num_shared()), 0)};
  }

  std::vector<Configuration> Instance::initial_configurations() const {
    std::vector<Configuration> out;
    const auto &init = model_->initial;
    int total = params_.correct();
    Configuration c = empty_configuration();
    std::function<void(std::size_t, int)> split = [&](std::size_t i,
                                                      int left) {
      auto loc = static_cast<std::size_t>(init[i]);
      if (i + 1 == init.size()) {
        c.values[loc] += left;
        out.push_back(c);
        c.values[loc] -= left;
        return;
      }
      for (int k = left; k >= 0; --k) {
        c.values[loc] += k;
        split(i + 1, left - k);
        c.values[loc] -= k;
      }
    };
    if (!init.empty()) {
      split(0, total);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool eval_guard(const Instance &inst,
                  const Guard &g,
                  const Configuration &c) {
    return std::all_of(g.begin(), g.end(), [&](const auto &x) {
      return inst.compile(x).eval(c);
    });
  }

  bool eval_rule_guard(const Instance &inst,
                       int rule,
                       const Configuration &c) {
    const auto &g = inst.rule_guard(rule);
    return std::all_of(
        g.begin(), g.end(), [&](const auto &x) { return x.eval(c); });
  }

  bool eval_prop(const Instance &inst, const Prop &p, const Configuration &c) {
    return inst.compile(p).eval(c);
  }

  const char *to_string(Inapplicable why) {
    return why == Inapplicable::empty_source ? "empty source location"
                                             : "guard false";
  }

  bool applicable(const Instance &inst, const Configuration &c, int rule) {
    const auto &r = inst.model().rules[static_cast<std::size_t>(rule)];
    return c.kappa(r.from) >= 1 && eval_rule_guard(inst, rule, c);
  }

  bool applicable_without_faulty(const Instance &inst,
                                 const Configuration &c,
                                 int rule) {
    const auto &r = inst.model().rules[static_cast<std::size_t>(rule)];
    const auto &g = inst.rule_guard_without_faulty(rule);
    return c.kappa(r.from) >= 1 &&
           std::all_of(g.begin(), g.end(),
                       [&](const auto &x) { return x.eval(c); });
  }

  ApplyResult apply_rule(const Instance &inst,
                         const Configuration &c,
                         int rule) {
    const auto &r = inst.model().rules[static_cast<std::size_t>(rule)];
    if (c.kappa(r.from) < 1) {
      return Inapplicable::empty_source;
    }
    if (!eval_rule_guard(inst, rule, c)) {
      return Inapplicable::guard_false;
    }
    Configuration next = c;
    next.values[static_cast<std::size_t>(r.from)] -= 1;
    next.values[static_cast<std::size_t>(r.to)] += 1;
    for (int u : r.updates) {
      next.values[static_cast<std::size_t>(inst.shared_slot(u))] += 1;
    }
    return next;
  }

  // -------------------------------------------------------------------------
  // Rendering

  namespace {

    std::string render_side(const ThresholdAutomatonModel &m,
                            const std::vector<std::pair<Term, long>> &terms,
                            long constant) {
      std::string out;
      for (const auto &[t, k] : terms) {
        if (!out.empty()) {
          out += " + ";
        }
        if (k != 1) {
          out += std::to_string(k) + "*";
        }
        out += m.term_name(t);
      }
      if (constant != 0 || out.empty()) {
        if (out.empty()) {
          out = std::to_string(constant);
        } else if (constant > 0) {
          out += " + " + std::to_string(constant);
        } else {
          out += " - " + std::to_string(-constant);
        }
      }
      return out;
    }

  }  // namespace

  std::string render(const ThresholdAutomatonModel &m,
                     const LinearConstraint &c) {
    std::vector<std::pair<Term, long>> lhs;
    std::vector<std::pair<Term, long>> rhs;
    for (const auto &[t, k] : c.expr.coeffs) {
      if (k > 0) {
        lhs.emplace_back(t, k);
      } else {
        rhs.emplace_back(t, -k);
      }
    }
    // Keep the constant on the right-hand side so that "x + f >= t + 1"
    // reads as written.
    std::string l = render_side(m, lhs, 0);
    std::string r = render_side(m, rhs, -c.expr.constant);
    return l + (c.rel == Rel::ge ? " >= " : " < ") + r;
  }

  std::string render(const ThresholdAutomatonModel &m, const Guard &g) {
    if (g.empty()) {
      return "true";
    }
    std::string out;
    for (const auto &c : g) {
      if (!out.empty()) {
        out += " && ";
      }
      out += render(m, c);
    }
    return out;
  }

  std::string render(const ThresholdAutomatonModel &m, const Prop &p) {
    auto kid = [&](const Prop &k) {
      bool wrap = k.kind == Prop::Kind::conj || k.kind == Prop::Kind::disj;
      return wrap ? "(" + render(m, k) + ")" : render(m, k);
    };
    switch (p.kind) {
      case Prop::Kind::constant:
        return p.value ? "true" : "false";
      case Prop::Kind::atom:
        return render(m, p.atom);
      case Prop::Kind::negation:
        return "!(" + render(m, p.kids.front()) + ")";
      case Prop::Kind::conj:
      case Prop::Kind::disj: {
        std::string out;
        const char *op = p.kind == Prop::Kind::conj ? " && " : " || ";
        for (const auto &k : p.kids) {
          if (!out.empty()) {
            out += op;
          }
          out += kid(k);
        }
        return out;
      }
    }
    return "";
  }

  std::string render_rule(const ThresholdAutomatonModel &m, const Rule &r) {
    std::string out = m.locations[static_cast<std::size_t>(r.from)] + " -> "
        + m.locations[static_cast<std::size_t>(r.to)] + " when ("
        + render(m, r.guard) + ") do (";
    for (std::size_t i = 0; i < r.updates.size(); ++i) {
      if (i > 0) {
        out += ", ";
      }
      out += m.shared[static_cast<std::size_t>(r.updates[i])];
    }
    return out + ")";
  }

}  // namespace bftmc::ta
