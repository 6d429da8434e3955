/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/ta_parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace bftmc::ta {

  namespace {

    enum class Tok : std::uint8_t {
      ident,
      number,
      symbol,
      end,
    };

    struct Token {
      Tok kind;
      std::string text;
      int line;
      int column;
    };

    struct Failure {
      Diagnostic diag;
    };

    [[noreturn]] void fail(const Token &at, std::string msg) {
      throw Failure{{at.line, at.column, std::move(msg), {}}};
    }

    std::vector<Token> lex(std::string_view src) {
      static const char *const kSymbols[] = {
          "->", "<>", "[]", "&&", "||", ">=", "<=", "==", "!=", ";", ":",
          ",",  "(",  ")",  "!",  "+",  "-",  "*",  ">",  "<",
      };
      std::vector<Token> out;
      int line = 1;
      int col = 1;
      std::size_t i = 0;
      auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j) {
          if (src[i] == '\n') {
            ++line;
            col = 1;
          } else {
            ++col;
          }
          ++i;
        }
      };
      while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
          advance(1);
          continue;
        }
        if (src.substr(i, 2) == "//" || c == '#') {
          while (i < src.size() && src[i] != '\n') {
            advance(1);
          }
          continue;
        }
        if (src.substr(i, 2) == "/*") {
          Token open{Tok::symbol, "/*", line, col};
          auto close = src.find("*/", i + 2);
          if (close == std::string_view::npos) {
            fail(open, "unterminated comment");
          }
          advance(close + 2 - i);
          continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
          std::size_t j = i;
          while (j < src.size()
                 && (std::isalnum(static_cast<unsigned char>(src[j]))
                     || src[j] == '_')) {
            ++j;
          }
          out.push_back({Tok::ident, std::string(src.substr(i, j - i)), line,
                         col});
          advance(j - i);
          continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
          std::size_t j = i;
          while (j < src.size()
                 && std::isdigit(static_cast<unsigned char>(src[j]))) {
            ++j;
          }
          out.push_back({Tok::number, std::string(src.substr(i, j - i)), line,
                         col});
          advance(j - i);
          continue;
        }
        bool matched = false;
        for (const char *sym : kSymbols) {
          std::string_view s(sym);
          if (src.substr(i, s.size()) == s) {
            out.push_back({Tok::symbol, std::string(s), line, col});
            advance(s.size());
            matched = true;
            break;
          }
        }
        if (!matched) {
          fail(Token{Tok::symbol, {}, line, col},
               std::string("unexpected character '") + c + "'");
        }
      }
      out.push_back({Tok::end, "<end of input>", line, col});
      return out;
    }

    enum class Context : std::uint8_t { guard, spec, resilience };

    class Parser {
     public:
      explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

      ThresholdAutomatonModel run() {
        while (peek().kind != Tok::end) {
          declaration();
        }
        if (m_.locations.empty()) {
          fail(peek(), "no locations declared");
        }
        return std::move(m_);
      }

      const std::map<std::string, Token> &rule_positions() const {
        return rule_pos_;
      }

     private:
      const Token &peek(std::size_t k = 0) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
      }
      const Token &next() {
        const Token &t = peek();
        if (pos_ + 1 < toks_.size()) {
          ++pos_;
        }
        return t;
      }
      bool at(const char *sym) const {
        return peek().kind == Tok::symbol && peek().text == sym;
      }
      bool at_word(const char *w) const {
        return peek().kind == Tok::ident && peek().text == w;
      }
      void expect(const char *sym) {
        if (!at(sym)) {
          fail(peek(), std::string("expected '") + sym + "' but found '"
                           + peek().text + "'");
        }
        next();
      }
      void expect_word(const char *w) {
        if (!at_word(w)) {
          fail(peek(), std::string("expected '") + w + "' but found '"
                           + peek().text + "'");
        }
        next();
      }
      const Token &ident() {
        if (peek().kind != Tok::ident) {
          fail(peek(), "expected identifier but found '" + peek().text + "'");
        }
        return next();
      }

      void declare(const Token &t) {
        if (!declared_.insert(t.text).second) {
          if (m_.location_index(t.text)) {
            fail(t, "duplicate location '" + t.text + "'");
          }
          fail(t, "duplicate declaration of '" + t.text + "'");
        }
      }

      std::vector<Token> name_list() {
        std::vector<Token> out;
        while (!at(";")) {
          out.push_back(ident());
          if (at(",")) {
            next();
          }
        }
        next();
        return out;
      }

      void declaration() {
        const Token &kw = peek();
        if (kw.kind != Tok::ident) {
          fail(kw, "expected a declaration but found '" + kw.text + "'");
        }
        if (kw.text == "model") {
          next();
          m_.name = ident().text;
          expect(";");
        } else if (kw.text == "params") {
          next();
          for (const auto &t : name_list()) {
            if (t.text != "n" && t.text != "t" && t.text != "f") {
              fail(t, "unknown parameter '" + t.text
                          + "' (parameters are n, t, f)");
            }
            declare(t);
            m_.params.push_back(t.text);
          }
        } else if (kw.text == "resilience") {
          next();
          m_.resilience = prop(Context::resilience);
          expect(";");
        } else if (kw.text == "shared") {
          next();
          for (const auto &t : name_list()) {
            declare(t);
            m_.shared.push_back(t.text);
          }
        } else if (kw.text == "locations") {
          next();
          for (const auto &t : name_list()) {
            declare(t);
            m_.locations.push_back(t.text);
          }
        } else if (kw.text == "initial") {
          next();
          for (const auto &t : name_list()) {
            int loc = location(t);
            if (std::find(m_.initial.begin(), m_.initial.end(), loc)
                != m_.initial.end()) {
              fail(t, "duplicate initial location '" + t.text + "'");
            }
            m_.initial.push_back(loc);
          }
        } else if (kw.text == "rule") {
          next();
          rule();
        } else if (kw.text == "spec") {
          next();
          spec();
        } else {
          fail(kw, "unknown declaration '" + kw.text + "'");
        }
      }

      int location(const Token &t) {
        auto i = m_.location_index(t.text);
        if (!i) {
          fail(t, "unknown location '" + t.text + "'");
        }
        return *i;
      }

      void rule() {
        Rule r;
        const Token &id = ident();
        if (rule_pos_.count(id.text) != 0) {
          fail(id, "duplicate rule id '" + id.text + "'");
        }
        rule_pos_.emplace(id.text, id);
        r.id = id.text;
        expect(":");
        r.from = location(ident());
        expect("->");
        r.to = location(ident());
        expect_word("when");
        expect("(");
        const Token &gstart = peek();
        r.guard = to_guard(prop(Context::guard), gstart);
        expect(")");
        if (at_word("do")) {
          next();
          expect("(");
          while (!at(")")) {
            const Token &v = ident();
            auto s = m_.shared_index(v.text);
            if (!s) {
              fail(v, "unknown shared variable '" + v.text + "'");
            }
            if (std::find(r.updates.begin(), r.updates.end(), *s)
                != r.updates.end()) {
              fail(v, "shared variable '" + v.text
                          + "' incremented twice on one rule");
            }
            r.updates.push_back(*s);
            if (at(",")) {
              next();
            }
          }
          next();
        }
        expect(";");
        if (r.self_loop() && !r.updates.empty()) {
          fail(id, "self-loop rule '" + r.id + "' must not update variables");
        }
        m_.rules.push_back(std::move(r));
      }

      void spec() {
        SpecFormula s;
        const Token &name = ident();
        for (const auto &other : m_.specs) {
          if (other.name == name.text) {
            fail(name, "duplicate spec '" + name.text + "'");
          }
        }
        s.name = name.text;
        expect(":");
        if (at("[]")) {
          next();
          s.kind = SpecFormula::Kind::invariant;
          s.goal = temporal_operand();
        } else if (at("<>")) {
          next();
          s.kind = SpecFormula::Kind::event_implication;
          s.trigger = temporal_operand();
          expect("->");
          s.init = prop(Context::spec);
        } else {
          s.kind = SpecFormula::Kind::liveness;
          if (!at_word("fair")) {
            s.init = prop(Context::spec);
            expect("->");
          }
          expect_word("fair");
          expect("->");
          expect("<>");
          Prop first = temporal_operand();
          if (at("->")) {
            next();
            expect("<>");
            s.trigger = std::move(first);
            s.goal = temporal_operand();
          } else {
            s.goal = std::move(first);
          }
        }
        expect(";");
        m_.specs.push_back(std::move(s));
      }

      Prop temporal_operand() {
        expect("(");
        Prop p = prop(Context::spec);
        expect(")");
        return p;
      }

      Guard to_guard(const Prop &p, const Token &where) {
        Guard g;
        std::vector<const Prop *> stack{&p};
        while (!stack.empty()) {
          const Prop *q = stack.back();
          stack.pop_back();
          switch (q->kind) {
            case Prop::Kind::constant:
              if (!q->value) {
                fail(where, "guard 'false' is not allowed");
              }
              break;
            case Prop::Kind::atom:
              g.push_back(q->atom);
              break;
            case Prop::Kind::conj:
              for (auto it = q->kids.rbegin(); it != q->kids.rend(); ++it) {
                stack.push_back(&*it);
              }
              break;
            default:
              fail(where, "guard must be a conjunction of comparisons");
          }
        }
        return g;
      }

      // prop := conj { "||" conj }
      Prop prop(Context ctx) {
        std::vector<Prop> kids{conj(ctx)};
        while (at("||")) {
          next();
          kids.push_back(conj(ctx));
        }
        return Prop::any(std::move(kids));
      }

      Prop conj(Context ctx) {
        std::vector<Prop> kids{unary(ctx)};
        while (at("&&")) {
          next();
          kids.push_back(unary(ctx));
        }
        return Prop::all(std::move(kids));
      }

      Prop unary(Context ctx) {
        if (at("!")) {
          next();
          return Prop::negate(unary(ctx));
        }
        if (at_word("true")) {
          next();
          return Prop::truth(true);
        }
        if (at_word("false")) {
          next();
          return Prop::truth(false);
        }
        if (at("(")) {
          // Either a parenthesized comparison operand or a nested prop.
          std::size_t save = pos_;
          try {
            return comparison(ctx);
          } catch (const Failure &) {
            pos_ = save;
          }
          next();
          Prop p = prop(ctx);
          expect(")");
          return p;
        }
        return comparison(ctx);
      }

      Prop comparison(Context ctx) {
        LinearExpr lhs = expr(ctx);
        const Token &op = peek();
        static const std::set<std::string> kRel{">=", ">", "<=", "<", "==",
                                                "!="};
        if (op.kind != Tok::symbol || kRel.count(op.text) == 0) {
          fail(op, "expected comparison operator but found '" + op.text
                       + "'");
        }
        next();
        LinearExpr rhs = expr(ctx);
        LinearExpr d = lhs - rhs;
        auto ge = [](LinearExpr e, long shift) {
          e.constant += shift;
          return Prop::of({std::move(e), Rel::ge});
        };
        auto lt = [](LinearExpr e, long shift) {
          e.constant += shift;
          return Prop::of({std::move(e), Rel::lt});
        };
        if (op.text == ">=") {
          return ge(d, 0);
        }
        if (op.text == ">") {
          return ge(d, -1);
        }
        if (op.text == "<") {
          return lt(d, 0);
        }
        if (op.text == "<=") {
          return lt(d, -1);
        }
        if (op.text == "==") {
          return Prop::all({ge(d, 0), lt(d, -1)});
        }
        if (ctx == Context::guard) {
          fail(op, "'!=' is not allowed in a guard");
        }
        return Prop::any({lt(d, 0), ge(d, -1)});
      }

      // expr := ["-"] term { ("+" | "-") term }
      LinearExpr expr(Context ctx) {
        LinearExpr e;
        bool negate = false;
        if (at("-")) {
          next();
          negate = true;
        }
        e = term(ctx);
        if (negate) {
          e *= -1;
        }
        while (at("+") || at("-")) {
          bool minus = next().text == "-";
          LinearExpr t = term(ctx);
          if (minus) {
            t *= -1;
          }
          e += t;
        }
        return e;
      }

      LinearExpr term(Context ctx) {
        LinearExpr e = factor(ctx);
        while (at("*")) {
          const Token &star = next();
          LinearExpr rhs = factor(ctx);
          if (!e.is_constant() && !rhs.is_constant()) {
            fail(star, ctx == Context::guard ? "non-linear guard"
                                             : "non-linear expression");
          }
          if (e.is_constant()) {
            rhs *= e.constant;
            e = rhs;
          } else {
            e *= rhs.constant;
          }
        }
        return e;
      }

      LinearExpr factor(Context ctx) {
        const Token &t = peek();
        LinearExpr e;
        if (t.kind == Tok::number) {
          next();
          e.constant = std::stol(t.text);
          return e;
        }
        if (at("-")) {
          next();
          e = factor(ctx);
          e *= -1;
          return e;
        }
        if (at("(")) {
          next();
          e = expr(ctx);
          expect(")");
          return e;
        }
        if (t.kind != Tok::ident) {
          fail(t, "expected expression but found '" + t.text + "'");
        }
        next();
        Term term{};
        if (auto i = m_.param_index(t.text)) {
          term = {TermKind::param, *i};
        } else if (auto s = m_.shared_index(t.text)) {
          if (ctx == Context::resilience) {
            fail(t, "resilience condition may only mention parameters");
          }
          term = {TermKind::shared, *s};
        } else if (auto l = m_.location_index(t.text)) {
          if (ctx == Context::guard) {
            fail(t, "guard may not mention location '" + t.text + "'");
          }
          if (ctx == Context::resilience) {
            fail(t, "resilience condition may only mention parameters");
          }
          term = {TermKind::location, *l};
        } else {
          fail(t, "unknown identifier '" + t.text + "'");
        }
        e.coeffs[term] = 1;
        return e;
      }

      std::vector<Token> toks_;
      std::size_t pos_ = 0;
      ThresholdAutomatonModel m_;
      std::set<std::string> declared_;
      std::map<std::string, Token> rule_pos_;
    };

  }  // namespace

  ParseResult parse_ta(std::string_view text) {
    try {
      Parser p(lex(text));
      auto m = p.run();
      auto diags = validate(m);
      if (diags.empty()) {
        return m;
      }
      for (auto &d : diags) {
        auto it = p.rule_positions().find(d.subject);
        if (d.line == 0 && it != p.rule_positions().end()) {
          d.line = it->second.line;
          d.column = it->second.column;
        } else if (d.line == 0) {
          d.line = 1;
          d.column = 1;
        }
      }
      return diags;
    } catch (const Failure &f) {
      return std::vector<Diagnostic>{f.diag};
    }
  }

  ThresholdAutomatonModel parse_ta_or_throw(std::string_view text) {
    auto r = parse_ta(text);
    if (auto *d = std::get_if<std::vector<Diagnostic>>(&r)) {
      throw ModelError(*d);
    }
    return std::get<ThresholdAutomatonModel>(std::move(r));
  }

  namespace {

    void names(std::string &out,
               const char *kw,
               const std::vector<std::string> &v) {
      out += kw;
      for (const auto &s : v) {
        out += " " + s;
      }
      out += ";\n";
    }

  }  // namespace

  std::string serialize_ta(const ThresholdAutomatonModel &m) {
    std::string out;
    if (!m.name.empty()) {
      out += "model " + m.name + ";\n";
    }
    names(out, "params", m.params);
    if (!m.resilience.is_true()) {
      out += "resilience " + render(m, m.resilience) + ";\n";
    }
    names(out, "shared", m.shared);
    names(out, "locations", m.locations);
    std::vector<std::string> init;
    for (int i : m.initial) {
      init.push_back(m.locations[static_cast<std::size_t>(i)]);
    }
    names(out, "initial", init);
    out += "\n";
    for (const auto &r : m.rules) {
      out += "rule " + r.id + ": " + render_rule(m, r) + ";\n";
    }
    if (!m.specs.empty()) {
      out += "\n";
    }
    for (const auto &s : m.specs) {
      out += "spec " + s.name + ": ";
      switch (s.kind) {
        case SpecFormula::Kind::invariant:
          out += "[](" + render(m, s.goal) + ")";
          break;
        case SpecFormula::Kind::event_implication:
          out += "<>(" + render(m, s.trigger) + ") -> " + render(m, s.init);
          break;
        case SpecFormula::Kind::liveness:
          if (!s.init.is_true()) {
            out += "(" + render(m, s.init) + ") -> ";
          }
          out += "fair -> ";
          if (!s.trigger.is_true()) {
            out += "<>(" + render(m, s.trigger) + ") -> ";
          }
          out += "<>(" + render(m, s.goal) + ")";
          break;
      }
      out += ";\n";
    }
    return out;
  }

  namespace {

    struct RuleShape {
      int from;
      int to;
      std::vector<LinearConstraint> guard;
      std::vector<int> updates;

      bool operator==(const RuleShape &o) const {
        return from == o.from && to == o.to && guard == o.guard
            && updates == o.updates;
      }
    };

    std::vector<RuleShape> shapes(const ThresholdAutomatonModel &m) {
      std::vector<RuleShape> out;
      for (const auto &r : m.rules) {
        RuleShape s{r.from, r.to, r.guard, r.updates};
        std::sort(s.updates.begin(), s.updates.end());
        out.push_back(std::move(s));
      }
      return out;
    }

  }  // namespace

  bool semantically_equal(const ThresholdAutomatonModel &a,
                          const ThresholdAutomatonModel &b) {
    if (a.params != b.params || a.shared != b.shared
        || a.locations != b.locations || a.initial != b.initial
        || a.resilience != b.resilience || a.specs != b.specs
        || a.rules.size() != b.rules.size()) {
      return false;
    }
    auto sa = shapes(a);
    auto sb = shapes(b);
    std::vector<bool> used(sb.size(), false);
    for (const auto &x : sa) {
      bool found = false;
      for (std::size_t j = 0; j < sb.size(); ++j) {
        if (!used[j] && sb[j] == x) {
          used[j] = true;
          found = true;
          break;
        }
      }
      if (!found) {
        return false;
      }
    }
    return true;
  }

}  // namespace bftmc::ta
