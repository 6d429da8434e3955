/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_TA_PARSER_HPP
#define BFTMC_TA_PARSER_HPP

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bftmc/ta.hpp"

namespace bftmc::ta {

  using ParseResult = std::variant<ThresholdAutomatonModel,
                                   std::vector<Diagnostic>>;

  /**
   * Parses the .ta subset documented in docs/ta-format.md. On success the
   * model has passed validate(); otherwise every diagnostic carries the
   * line and column of the offending token where one is known.
   */
  ParseResult parse_ta(std::string_view text);

  /// Convenience wrapper that throws ModelError on failure.
  ThresholdAutomatonModel parse_ta_or_throw(std::string_view text);

  std::string serialize_ta(const ThresholdAutomatonModel &m);

  /**
   * Same parameters, shared variables, locations, initial set, resilience
   * and specs, and the same multiset of rules up to renaming of rule ids.
   */
  bool semantically_equal(const ThresholdAutomatonModel &a,
                          const ThresholdAutomatonModel &b);

}  // namespace bftmc::ta

#endif  // BFTMC_TA_PARSER_HPP
