/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bftmc/builtin.hpp"
#include "bftmc/trace_json.hpp"
#include "bftmc/ta_parser.hpp"

using namespace bftmc;
using namespace bftmc::trace_json;

namespace {

  std::string slurp(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void golden(const std::string &name, const std::string &actual) {
    std::string path = std::string(BFTMC_GOLDEN) + "/" + name;
    if (std::getenv("BFTMC_UPDATE_GOLDEN") != nullptr) {
      std::ofstream(path) << actual;
    }
    CHECK(slurp(path) == actual);
  }

  std::shared_ptr<const ta::ThresholdAutomatonModel> bv() {
    return std::make_shared<const ta::ThresholdAutomatonModel>(ta::builtin_bv());
  }

  std::shared_ptr<const ta::ThresholdAutomatonModel> no_echo() {
    return std::make_shared<const ta::ThresholdAutomatonModel>(
        ta::parse_ta_or_throw(slurp(std::string(BFTMC_TEST_DATA) +
                                    "/bv_no_echo.ta")));
  }

  // b0 < 3: broken after three broadcasts of 0.
  ta::Prop few_zeros(const ta::Instance &inst) {
    ta::LinearExpr e;
    e.coeffs[{ta::TermKind::shared, *inst.model().shared_index("b0")}] = 1;
    e.constant = -3;
    return ta::Prop::of({e, ta::Rel::lt});
  }

  const consensus::RoundModelFactory kDbft = [](BinVal par) {
    return ta::builtin_dbft_round(par);
  };

}  // namespace

TEST_CASE("a holding verdict carries no witness") {
  ta::Instance inst(bv(), {4, 1, 1});
  auto v = check::check_spec(inst, *inst.model().spec("termination"));
  auto doc = document(inst, "bv", "termination", v);
  CHECK(doc["schema"] == kSchema);
  CHECK(doc["verdict"] == "holds");
  CHECK_FALSE(doc.contains("witness"));
  CHECK(doc["model"]["params"]["n"] == 4);
  CHECK(doc["stats"].contains("wall_ms"));
  CHECK_FALSE(validate(inst, doc));
}

TEST_CASE("a violated invariant round-trips and replays") {
  ta::Instance inst(bv(), {4, 1, 1});
  auto v = check::check_invariant(inst, few_zeros(inst));
  REQUIRE(v.violated());
  auto doc = document(inst, "bv", "few-zeros", v, false);
  CHECK(doc["verdict"] == "violated");
  CHECK(doc["witness"]["kind"] == "trace");
  CHECK(doc["witness"]["steps"].size() == 3);
  CHECK_FALSE(doc["stats"].contains("wall_ms"));

  auto back = witness_from_json(inst, ojson::parse(doc.dump())["witness"]);
  CHECK(back == *v.witness);
  CHECK_FALSE(validate(inst, doc));

  auto bad = doc;
  bad["witness"]["steps"][1]["rule"] = "r12";
  CHECK(validate(inst, bad));
  auto junk = doc;
  junk["witness"]["steps"][0].erase("after");
  CHECK_THROWS_AS(witness_from_json(inst, junk["witness"]),
                  std::invalid_argument);

  auto text = to_text(inst, *v.witness);
  CHECK(text.find("r1:") != std::string::npos);
}

TEST_CASE("a lasso has prefix and cycle") {
  ta::Instance inst(no_echo(), {4, 1, 1});
  auto v = check::check_spec(inst, *inst.model().spec("obligation0"));
  REQUIRE(v.violated());
  auto doc = document(inst, "bv_no_echo.ta", "obligation0", v, false);
  CHECK(doc["witness"]["kind"] == "lasso");
  CHECK(doc["witness"].contains("prefix"));
  CHECK(doc["witness"].contains("cycle"));
  CHECK_FALSE(validate(inst, doc));
  golden("bv_no_echo_obligation0.json", doc.dump(2) + "\n");
  CHECK(document_text(doc).find("violated") != std::string::npos);
}

TEST_CASE("consensus witness documents") {
  consensus::Options o;
  o.allow_unsafe = true;
  auto r = consensus::check_consensus(kDbft, {3, 1, 1}, 2, "agreement", o);
  REQUIRE(r.kind == check::Verdict::Kind::violated);
  auto doc = document(kDbft, {3, 1, 1}, "dbft", r, true, false);
  CHECK(doc["witness"]["kind"] == "rounds");
  CHECK(doc["model"]["rounds"] == 2);
  CHECK_FALSE(validate(kDbft, {3, 1, 1}, doc, true));
  auto w = consensus_witness_from_json(kDbft, {3, 1, 1}, doc["witness"], true);
  CHECK(w.rounds.size() == 2);
  golden("dbft_311_agreement.json", doc.dump(2) + "\n");
}

TEST_CASE("configuration JSON") {
  ta::Instance inst(bv(), {4, 1, 1});
  auto c = inst.initial_configurations().back();
  auto j = to_json(inst, c);
  CHECK(j.contains("kappa"));
  CHECK(j.contains("shared"));
  CHECK(configuration_from_json(inst, j) == c);
  j["kappa"]["nowhere"] = 1;
  CHECK_THROWS_AS(configuration_from_json(inst, j), std::invalid_argument);
}
