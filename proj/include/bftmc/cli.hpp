/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_CLI_HPP
#define BFTMC_CLI_HPP

#include <ostream>
#include <span>
#include <string>

#include "bftmc/checker.hpp"

namespace bftmc::cli {

  inline constexpr int kExitOk = 0;
  inline constexpr int kExitViolated = 1;
  inline constexpr int kExitError = 2;
  inline constexpr int kExitUnknown = 3;

  int exit_code(check::Verdict::Kind k);

  /// Worst code over several verdicts: violated, then unknown, then ok.
  int combine(int a, int b);

  /**
   * Entry point of the command-line tool; `args` excludes the program
   * name. Results go to `out` (or the --output file), diagnostics to `err`.
   */
  int run(std::span<const std::string> args, std::ostream &out,
          std::ostream &err);

}  // namespace bftmc::cli

#endif  // BFTMC_CLI_HPP
