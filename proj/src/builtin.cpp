/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/builtin.hpp"

#include "bftmc/ta_parser.hpp"

namespace bftmc::ta {

  namespace {

    // Byzantine processes never occupy locations; they only loosen guards
    // by f. Delivery states carry self-loops since a process may stay there
    // forever.
    const char *const kBvSource = R"(model bv_broadcast;
params n t f;
resilience n > 3*t && f <= t && f >= 0;
shared b0 b1;
locations locV0 locV1 locB0 locB1 locB01 locC0 locCB0 locC1 locCB1 locC01;
initial locV0 locV1;

// initial broadcast of the proposed value
rule r1: locV0 -> locB0 when (true) do (b0);
rule r2: locV1 -> locB1 when (true) do (b1);
// echo a value seen from t+1 distinct processes
rule r3: locB0 -> locB01 when (b1 + f >= t + 1) do (b1);
rule r4: locB1 -> locB01 when (b0 + f >= t + 1) do (b0);
rule r5: locC0 -> locCB0 when (b1 + f >= t + 1) do (b1);
rule r6: locC1 -> locCB1 when (b0 + f >= t + 1) do (b0);
// deliver a value seen from 2t+1 distinct processes
rule r7: locB0 -> locC0 when (b0 + f >= 2*t + 1);
rule r8: locB1 -> locC1 when (b1 + f >= 2*t + 1);
rule r9: locB01 -> locCB0 when (b0 + f >= 2*t + 1);
rule r10: locB01 -> locCB1 when (b1 + f >= 2*t + 1);
rule r11: locCB0 -> locC01 when (b1 + f >= 2*t + 1);
rule r12: locCB1 -> locC01 when (b0 + f >= 2*t + 1);
rule s1: locC0 -> locC0 when (true);
rule s2: locCB0 -> locCB0 when (true);
rule s3: locC1 -> locC1 when (true);
rule s4: locCB1 -> locCB1 when (true);
rule s5: locC01 -> locC01 when (true);

spec justification0: <>(locC0 != 0 || locCB0 != 0 || locC01 != 0) -> locV0 != 0;
spec justification1: <>(locC1 != 0 || locCB1 != 0 || locC01 != 0) -> locV1 != 0;
spec obligation0: (locV0 >= t + 1) -> fair -> <>(locC0 + locCB0 + locC01 == n - f);
spec obligation1: (locV1 >= t + 1) -> fair -> <>(locC1 + locCB1 + locC01 == n - f);
spec uniformity0: fair -> <>(locC0 + locCB0 + locC01 > 0) -> <>(locC0 + locCB0 + locC01 == n - f);
spec uniformity1: fair -> <>(locC1 + locCB1 + locC01 > 0) -> <>(locC1 + locCB1 + locC01 == n - f);
spec termination: fair -> <>(locV0 + locV1 + locB0 + locB1 + locB01 == 0);
)";

  }  // namespace

  const std::string &builtin_bv_source() {
    static const std::string src = kBvSource;
    return src;
  }

  ThresholdAutomatonModel builtin_bv() {
    return parse_ta_or_throw(builtin_bv_source());
  }

  std::string builtin_dbft_round_source(BinVal parity) {
    const std::string p = std::to_string(to_int(parity));
    auto exit0 = parity == BinVal::zero ? "decided0" : "next_est0";
    auto exit1 = parity == BinVal::one ? "decided1" : "next_est1";
    std::string s = "model dbft_round_parity" + p + ";\n";
    s += R"(params n t f;
resilience n > 3*t && f <= t && f >= 0;
shared b0 b1 e0 e1;
locations locV0 locV1 locB0 locB1 locB01 locC0 locCB0 locC1 locCB1 locC01
          next_est0 next_est1 decided0 decided1;
initial locV0 locV1;

// BV phase: broadcast the estimate, echo at t+1
rule r1: locV0 -> locB0 when (true) do (b0);
rule r2: locV1 -> locB1 when (true) do (b1);
rule r3: locB0 -> locB01 when (b1 + f >= t + 1) do (b1);
rule r4: locB1 -> locB01 when (b0 + f >= t + 1) do (b0);
// BV counting continues while waiting for ECHOs
rule r5: locC0 -> locCB0 when (b1 + f >= t + 1) do (b1);
rule r6: locC1 -> locCB1 when (b0 + f >= t + 1) do (b0);
// first bv-delivery sends the single ECHO of the round
rule r7: locB0 -> locC0 when (b0 + f >= 2*t + 1) do (e0);
rule r8: locB1 -> locC1 when (b1 + f >= 2*t + 1) do (e1);
rule r9: locB01 -> locCB0 when (b0 + f >= 2*t + 1) do (e0);
rule r10: locB01 -> locCB1 when (b1 + f >= 2*t + 1) do (e1);
rule r11: locCB0 -> locC01 when (b1 + f >= 2*t + 1);
rule r12: locCB1 -> locC01 when (b0 + f >= 2*t + 1);
)";
    // n - t ECHOs carrying w with w in echoes: est <- w, decide if parity.
    s += "rule x1: locC0 -> " + std::string(exit0)
        + " when (e0 + f >= n - t);\n";
    s += "rule x2: locCB0 -> " + std::string(exit0)
        + " when (e0 + f >= n - t);\n";
    s += "rule x3: locC01 -> " + std::string(exit0)
        + " when (e0 + f >= n - t);\n";
    s += "rule x4: locC1 -> " + std::string(exit1)
        + " when (e1 + f >= n - t);\n";
    s += "rule x5: locCB1 -> " + std::string(exit1)
        + " when (e1 + f >= n - t);\n";
    s += "rule x6: locC01 -> " + std::string(exit1)
        + " when (e1 + f >= n - t);\n";
    // n - t ECHOs in total with echoes = {0,1}: est <- parity.
    s += "rule x7: locC01 -> next_est" + p
        + " when (e0 + e1 + f >= n - t);\n";
    s += R"(rule s1: next_est0 -> next_est0 when (true);
rule s2: next_est1 -> next_est1 when (true);
rule s3: decided0 -> decided0 when (true);
rule s4: decided1 -> decided1 when (true);

spec round_termination: fair -> <>(next_est0 + next_est1 + decided0 + decided1 == n - f);
)";
    s += "spec parity_decision: [](decided" + std::to_string(to_int(!parity))
        + " == 0);\n";
    return s;
  }

  ThresholdAutomatonModel builtin_dbft_round(BinVal parity) {
    return parse_ta_or_throw(builtin_dbft_round_source(parity));
  }

}  // namespace bftmc::ta
