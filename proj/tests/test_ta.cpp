/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "bftmc/builtin.hpp"
#include "bftmc/checker.hpp"
#include "bftmc/ta_parser.hpp"

using namespace bftmc;
using namespace bftmc::ta;
namespace fs = std::filesystem;

namespace {

  std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::vector<fs::path> corpus(bool malformed) {
    std::vector<fs::path> out;
    for (const auto &e : fs::directory_iterator(BFTMC_TEST_DATA)) {
      if (e.path().extension() == ".ta" &&
          (e.path().filename().string().starts_with("malformed_") == malformed)) {
        out.push_back(e.path());
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Counts "rule" declarations by scanning lines, independent of the parser.
  int count_rules(const std::string &text) {
    static const std::regex decl(R"((^|[;/]\s*|\*/\s*)rule\s+\w+\s*:)");
    int k = 0;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      auto cut = line.find("//");
      if (cut != std::string::npos) {
        line.resize(cut);
      }
      auto b = std::sregex_iterator(line.begin(), line.end(), decl);
      k += static_cast<int>(std::distance(b, std::sregex_iterator()));
    }
    return k;
  }

  std::shared_ptr<const ThresholdAutomatonModel> bv() {
    return std::make_shared<const ThresholdAutomatonModel>(builtin_bv());
  }

  int rule_by_locs(const ThresholdAutomatonModel &m, const std::string &from,
                   const std::string &to) {
    for (std::size_t i = 0; i < m.rules.size(); ++i) {
      if (m.locations[m.rules[i].from] == from &&
          m.locations[m.rules[i].to] == to) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

}  // namespace

TEST_CASE("builtin BV model shape") {
  auto m = builtin_bv();
  CHECK(m.locations.size() == 10);
  CHECK(m.shared == std::vector<std::string>{"b0", "b1"});
  CHECK(m.params.size() == 3);

  int r = rule_by_locs(m, "locV0", "locB0");
  REQUIRE(r >= 0);
  CHECK(m.rules[r].guard.empty());
  CHECK(m.rules[r].updates == std::vector<int>{*m.shared_index("b0")});

  int e = rule_by_locs(m, "locB0", "locB01");
  REQUIRE(e >= 0);
  CHECK(render(m, m.rules[e].guard) == "b1 + f >= t + 1");
  CHECK(m.rules[e].updates == std::vector<int>{*m.shared_index("b1")});
}

TEST_CASE("builtin DBFT round models") {
  for (BinVal par : kBinVals) {
    auto m = builtin_dbft_round(par);
    CHECK(m.shared == std::vector<std::string>{"b0", "b1", "e0", "e1"});
    auto wrong = *m.location_index(kDecided[to_int(!par)]);
    for (const auto &r : m.rules) {
      CHECK((r.to != wrong || r.self_loop()));
    }
    // The mixed exit leads to next_est of the parity.
    int mixed = rule_by_locs(m, "locC01", kNextEst[to_int(par)]);
    REQUIRE(mixed >= 0);
    CHECK(render(m, m.rules[mixed].guard) == "e0 + e1 + t + f >= n");
  }
}

TEST_CASE("parse errors") {
  auto empty = parse_ta("");
  REQUIRE(std::holds_alternative<std::vector<Diagnostic>>(empty));
  CHECK(std::get<1>(empty).front().message == "no locations declared");

  auto nonlin = parse_ta(
      "model x; params n t f; shared b0 b1; locations A B; initial A;\n"
      "rule r: A -> B when (b0 * b1 >= 1);\n");
  REQUIRE(std::holds_alternative<std::vector<Diagnostic>>(nonlin));
  const auto &d = std::get<1>(nonlin).front();
  CHECK(d.message == "non-linear guard");
  CHECK(d.line == 2);
  CHECK(d.column > 0);
}

TEST_CASE("minimal model serializes to valid text") {
  auto m = parse_ta_or_throw("model one; params n t f; locations L; initial L;");
  auto text = serialize_ta(m);
  auto again = parse_ta_or_throw(text);
  CHECK(semantically_equal(m, again));
  CHECK(again.rules.empty());
}

TEST_CASE("round trip of builtin models") {
  std::vector<ThresholdAutomatonModel> ms{builtin_bv(),
                                          builtin_dbft_round(BinVal::zero),
                                          builtin_dbft_round(BinVal::one)};
  for (const auto &m : ms) {
    auto once = parse_ta_or_throw(serialize_ta(m));
    CHECK(semantically_equal(m, once));
    CHECK(serialize_ta(once) == serialize_ta(m));
  }
}

TEST_CASE("corpus: valid files round-trip and keep their rule count") {
  auto files = corpus(false);
  CHECK(files.size() >= 7);
  for (const auto &f : files) {
    CAPTURE(f.string());
    auto text = slurp(f);
    auto m = parse_ta_or_throw(text);
    CHECK(static_cast<int>(m.rules.size()) == count_rules(text));
    auto out = serialize_ta(m);
    auto back = parse_ta_or_throw(out);
    CHECK(semantically_equal(m, back));
    CHECK(static_cast<int>(back.rules.size()) == count_rules(out));
  }
}

TEST_CASE("corpus: malformed files fail with positions") {
  auto files = corpus(true);
  CHECK(files.size() >= 3);
  for (const auto &f : files) {
    CAPTURE(f.string());
    auto r = parse_ta(slurp(f));
    REQUIRE(std::holds_alternative<std::vector<Diagnostic>>(r));
    for (const auto &d : std::get<1>(r)) {
      CHECK(d.line > 0);
      CHECK(d.column > 0);
    }
  }
}

TEST_CASE("semantic validation") {
  auto twice = parse_ta(
      "model x; params n t f; shared a; locations A B C; initial A;\n"
      "rule r1: A -> B when (true) do (a);\n"
      "rule r2: B -> C when (true) do (a);\n");
  REQUIRE(std::holds_alternative<std::vector<Diagnostic>>(twice));
  CHECK(std::get<1>(twice).front().message.find("incremented twice") !=
        std::string::npos);

  auto loop = parse_ta(
      "model x; params n t f; shared a; locations A; initial A;\n"
      "rule s: A -> A when (true) do (a);\n");
  CHECK(std::holds_alternative<std::vector<Diagnostic>>(loop));

  auto undeclared = parse_ta(
      "model x; params n t f; shared a; locations A B; initial A;\n"
      "rule r: A -> B when (q >= 1);\n");
  CHECK(std::holds_alternative<std::vector<Diagnostic>>(undeclared));
}

TEST_CASE("eval_guard on the echo guard") {
  Instance inst(bv(), {4, 1, 1});
  const auto &m = inst.model();
  int e = rule_by_locs(m, "locB0", "locB01");
  auto c = inst.empty_configuration();
  c.values[inst.shared_slot(*m.shared_index("b1"))] = 1;
  CHECK(eval_guard(inst, m.rules[e].guard, c));
  c.values[inst.shared_slot(*m.shared_index("b1"))] = 0;
  CHECK_FALSE(eval_guard(inst, m.rules[e].guard, c));
  CHECK(eval_guard(inst, Guard{}, c));
}

TEST_CASE("apply_rule") {
  Instance inst(bv(), {4, 1, 1});
  const auto &m = inst.model();
  int r = rule_by_locs(m, "locV0", "locB0");
  auto v0 = *m.location_index("locV0");
  auto b0loc = *m.location_index("locB0");
  auto c = inst.empty_configuration();
  c.values[v0] = 1;
  c.values[*m.location_index("locV1")] = 2;
  auto next = apply_rule(inst, c, r);
  REQUIRE(std::holds_alternative<Configuration>(next));
  const auto &n = std::get<Configuration>(next);
  CHECK(n.kappa(v0) == 0);
  CHECK(n.kappa(b0loc) == 1);
  CHECK(n.values[inst.shared_slot(*m.shared_index("b0"))] == 1);

  auto again = apply_rule(inst, n, r);
  REQUIRE(std::holds_alternative<Inapplicable>(again));
  CHECK(std::get<Inapplicable>(again) == Inapplicable::empty_source);

  int e = rule_by_locs(m, "locB0", "locB01");
  auto g = apply_rule(inst, n, e);
  REQUIRE(std::holds_alternative<Inapplicable>(g));
  CHECK(std::get<Inapplicable>(g) == Inapplicable::guard_false);
}

TEST_CASE("property: reachable configurations keep the process count") {
  for (Params p : {Params{4, 1, 1}, Params{7, 2, 2}, Params{4, 1, 0}}) {
    Instance inst(bv(), p);
    auto rr = check::reach(inst);
    for (const auto &c : rr.states) {
      int sum = 0;
      for (int l = 0; l < inst.num_locations(); ++l) {
        CHECK(c.kappa(l) >= 0);
        sum += c.kappa(l);
      }
      CHECK(sum == p.correct());
      for (int v = 0; v < inst.num_shared(); ++v) {
        int x = c.values[inst.shared_slot(v)];
        CHECK(x >= 0);
        CHECK(x <= p.correct());
      }
    }
  }
}

TEST_CASE("instance rejects unsafe parameters unless allowed") {
  CHECK_THROWS_AS(Instance(bv(), {3, 1, 1}), std::invalid_argument);
  CHECK_NOTHROW(Instance(bv(), {3, 1, 1}, true));
}

TEST_CASE("malformed files report the offending token") {
  struct Expect {
    const char *file;
    int line;
    int column;
    const char *message;
  };
  for (const auto &e : {
           Expect{"malformed_bad_character.ta", 10, 25,
                  "unexpected character '$'"},
           Expect{"malformed_missing_semicolon.ta", 11, 1,
                  "expected ';' but found 'rule'"},
           Expect{"malformed_unknown_location.ta", 11, 15,
                  "unknown location 'C'"},
           Expect{"malformed_unterminated_comment.ta", 10, 1,
                  "unterminated comment"},
       }) {
    CAPTURE(e.file);
    auto r = parse_ta(slurp(fs::path(BFTMC_TEST_DATA) / e.file));
    REQUIRE(std::holds_alternative<std::vector<Diagnostic>>(r));
    const auto &d = std::get<1>(r).front();
    CHECK(d.line == e.line);
    CHECK(d.column == e.column);
    CHECK(d.message == e.message);
  }
}
