/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_ORACLE_HPP
#define BFTMC_ORACLE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bftmc/checker.hpp"
#include "bftmc/simnet.hpp"
#include "bftmc/ta.hpp"

namespace bftmc::oracle {

  /// Number of correct processes whose delivered set is {}, {0}, {1}, {0,1}.
  using Projection = std::array<int, 4>;

  std::string to_string(const Projection &p);

  /// Projection of a BV-shaped automaton configuration (locations by name).
  Projection project(const ta::ThresholdAutomatonModel &m,
                     const ta::Configuration &c);
  Projection project(const simnet::World<BvState> &w);

  struct SplitReport {
    int zeros = 0;  // correct processes proposing 0
    std::set<Projection> checker;
    std::set<Projection> simnet;
    std::uint64_t checker_states = 0;
    std::uint64_t simnet_states = 0;
  };

  /// First disagreement with a witness from the side that has the projection.
  struct Discrepancy {
    int zeros = 0;
    Projection projection{};
    bool only_in_checker = false;
    std::optional<check::Trace> checker_witness;
    std::optional<simnet::Schedule> simnet_witness;
    std::string describe() const;
  };

  struct Report {
    bool equal = true;
    std::vector<SplitReport> splits;
    std::optional<Discrepancy> first;
  };

  /**
   * Compares reachable delivered-value projections of checker::reach over
   * `inst` with simnet::explore_exhaustive over concrete BV machines, per
   * input split. `zeros` restricts to one split.
   */
  Report oracle_equiv(const ta::Instance &inst,
                      std::optional<int> zeros = std::nullopt,
                      std::uint64_t sim_cap = 5'000'000);

  /// Inputs with the first `zeros` correct processes proposing 0.
  std::vector<BinVal> split_inputs(const Params &p, int zeros);

  /**
   * Searches the concrete machines for an execution in which some correct
   * process delivers a value that no correct process proposed.
   */
  std::optional<simnet::Schedule> find_unjustified_delivery(
      const Params &p,
      std::uint64_t cap = 5'000'000);

}  // namespace bftmc::oracle

#endif  // BFTMC_ORACLE_HPP
