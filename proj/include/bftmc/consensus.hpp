/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_CONSENSUS_HPP
#define BFTMC_CONSENSUS_HPP

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bftmc/checker.hpp"
#include "bftmc/core.hpp"
#include "bftmc/ta.hpp"

namespace bftmc::consensus {

  /// Builds the one-round automaton for a round of the given parity.
  using RoundModelFactory = std::function<ta::ThresholdAutomatonModel(BinVal)>;

  /**
   * Life-cycle tag of a process across rounds: undecided, decided in the
   * previous round, decided two rounds ago. After its third round as a
   * decided process it halts and takes no further part.
   */
  enum class Tag : std::uint8_t { undecided, decided1, decided2 };
  inline constexpr std::array<Tag, 3> kTags = {Tag::undecided, Tag::decided1,
                                               Tag::decided2};
  const char *to_string(Tag t);

  /**
   * The round automaton replicated once per tag, plus a "halted" sink. The
   * round automaton must declare locV0/locV1 as its initial locations and
   * next_est0/1, decided0/1 as its exits.
   */
  struct RoundProduct {
    std::shared_ptr<const ta::ThresholdAutomatonModel> model;
    int base_locations = 0;
    int halted = 0;
    std::array<int, 2> start{};          // locV0, locV1 in the base model
    std::array<int, 2> next_est{};
    std::array<int, 2> decided{};

    int loc(Tag t, int base) const {
      return static_cast<int>(t) * base_locations + base;
    }
    bool terminal(int base) const;
  };

  RoundProduct make_round_product(const ta::ThresholdAutomatonModel &round);

  /// Decision bits accumulated by earlier rounds.
  struct Bits {
    bool decided[2] = {false, false};
    friend bool operator==(const Bits &, const Bits &) = default;
  };

  struct RoundSegment {
    Round round = 1;
    BinVal parity = BinVal::one;
    check::Trace trace;
  };

  /**
   * Rounds 1..k as traces on the round product of each parity; consecutive
   * segments are linked by the barrier map. A termination violation ends in
   * a lasso inside the last round.
   */
  struct ConsensusWitness {
    std::vector<RoundSegment> rounds;
    std::optional<check::Lasso> stuck;
  };

  /// Initial estimate splits: every split, both unanimous ones, or one value.
  enum class Inputs : std::uint8_t { all, unanimous, all_zero, all_one };

  struct Options {
    check::Options check;
    /// Input splits considered by the termination check.
    Inputs termination_inputs = Inputs::unanimous;
    bool allow_unsafe = false;
  };

  struct Result {
    std::string property;
    check::Verdict::Kind kind = check::Verdict::Kind::holds;
    check::Stats stats;
    std::optional<ConsensusWitness> witness;
    /// Rounds actually explored before the verdict was reached.
    Round rounds = 0;
  };

  inline constexpr std::array<const char *, 4> kProperties = {
      "agreement", "validity0", "validity1", "termination"};

  /**
   * Round-rigid composition: every correct process finishes round r before
   * round r+1 starts, shared variables reset per round, exits of round r
   * seed round r+1. Safety properties hold when no violation appears within
   * `max_rounds`; termination is unknown-at-bound when undecided processes
   * survive the last round.
   */
  Result check_consensus(const RoundModelFactory &factory,
                         const Params &p,
                         Round max_rounds,
                         const std::string &property,
                         const Options &opts = {});

  std::vector<Result> check_consensus_all(const RoundModelFactory &factory,
                                          const Params &p,
                                          Round max_rounds,
                                          const Options &opts = {});

  /// Configuration that starts the round after `end`, and the updated bits.
  std::pair<ta::Configuration, Bits> barrier(const RoundProduct &rp,
                                             const ta::Configuration &end,
                                             Bits bits);

  /// True when every participating process sits in an exit location.
  bool at_barrier(const RoundProduct &rp, const ta::Configuration &c);

  /// Why the witness does not replay, or nullopt.
  std::optional<std::string> replay_consensus(const RoundModelFactory &factory,
                                              const Params &p,
                                              const ConsensusWitness &w,
                                              bool allow_unsafe = false);

}  // namespace bftmc::consensus

#endif  // BFTMC_CONSENSUS_HPP
