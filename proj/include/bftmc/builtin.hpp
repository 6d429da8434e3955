/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_BUILTIN_HPP
#define BFTMC_BUILTIN_HPP

#include <memory>
#include <string>

#include "bftmc/ta.hpp"

namespace bftmc::ta {

  /// .ta source of the BV-broadcast automaton (10 locations, b0/b1).
  const std::string &builtin_bv_source();
  ThresholdAutomatonModel builtin_bv();

  /**
   * One round of the DBFT binary consensus variant. Reuses the BV-broadcast
   * locations, counts ECHO messages in e0/e1 and ends in next_est0,
   * next_est1, decided0 or decided1. Only decided<parity> has incoming
   * rules.
   */
  std::string builtin_dbft_round_source(BinVal parity);
  ThresholdAutomatonModel builtin_dbft_round(BinVal parity);

  /// Names of the four round-exit locations of builtin_dbft_round.
  inline constexpr const char *kNextEst[] = {"next_est0", "next_est1"};
  inline constexpr const char *kDecided[] = {"decided0", "decided1"};

}  // namespace bftmc::ta

#endif  // BFTMC_BUILTIN_HPP
