/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_SCENARIOS_HPP
#define BFTMC_SCENARIOS_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bftmc/core.hpp"
#include "bftmc/protocols.hpp"
#include "bftmc/simnet.hpp"

namespace bftmc::scenarios {

  using ojson = nlohmann::ordered_json;

  /// Common coin: c_r for r = 1 .. size().
  class CoinOracle {
   public:
    CoinOracle() = default;
    explicit CoinOracle(std::vector<BinVal> values) : values_(std::move(values)) {}

    /// "1,0,1"; throws std::invalid_argument on anything else.
    static CoinOracle parse(const std::string &text);
    /// 1, 0, 1, 0, ... of length k.
    static CoinOracle alternating(Round k);

    /// Throws std::out_of_range for rounds it does not define.
    BinVal operator()(Round r) const;
    Round size() const {
      return static_cast<Round>(values_.size());
    }
    std::string to_string() const;

   private:
    std::vector<BinVal> values_;
  };

  struct Claim {
    std::string name;
    bool passed = true;
    /// Expected versus observed when the claim fails.
    std::string detail;
  };

  struct ScenarioReport {
    std::string scenario;
    ojson setup = ojson::object();
    std::vector<ojson> observations;
    std::vector<Claim> claims;

    bool passed() const;
    void claim(std::string name, bool ok, std::string detail = {});
  };

  ojson to_json(const ScenarioReport &r);
  std::string to_text(const ScenarioReport &r);

  // ---------------------------------------------------------------------
  // Randomized consensus under a coin-observing adversary

  struct HbView {
    ProcessId id = 0;
    BinVal est_before = BinVal::zero;
    BinSet conts;
    BinSet values;
    BinVal est_after = BinVal::zero;
    bool decided = false;
  };

  struct HbRound {
    Round round = 1;
    BinVal coin = BinVal::zero;
    /// Holder of the minority estimate, the majority holder kept in the
    /// dark until the coin is known, and the other majority holder.
    ProcessId lonely = 0;
    ProcessId starved = 0;
    ProcessId partner = 0;
    std::array<HbView, 3> procs{};
  };

  struct HbReplay {
    ScenarioReport report;
    std::vector<HbRound> rounds;
    simnet::Schedule schedule;
    std::size_t decisions = 0;
  };

  /**
   * Runs the adversary strategy for rounds 1..k at (n, t, f) = (4, 1, 1)
   * with process 3 Byzantine. `inputs` must hold both values.
   */
  HbReplay replay_honeybadger(const std::array<BinVal, 3> &inputs,
                              const CoinOracle &coin,
                              Round k);

  struct HbControl {
    int runs = 0;
    int decided_runs = 0;
    /// Highest round in which some correct process decided, over all runs.
    Round max_decision_round = 0;
    std::vector<std::uint64_t> failed_seeds;
  };

  /**
   * Inputs (0,1,1), a uniformly random scheduler over in-flight messages
   * with occasional random Byzantine messages, and a coin drawn per round
   * from the seed. A run fails when some correct process is still
   * undecided after `bound` rounds.
   */
  HbControl hb_fair_control(int seeds = 100,
                            Round bound = 20,
                            std::uint64_t first_seed = 1);

  ScenarioReport control_report(const HbControl &c, Round bound);

  // ---------------------------------------------------------------------
  // Checkpoint voting

  struct Checkpoint {
    int height = 0;
    int block = 0;
    friend auto operator<=>(const Checkpoint &, const Checkpoint &) = default;
  };
  inline constexpr Checkpoint kGenesis{0, 0};
  std::string to_string(const Checkpoint &c);

  struct Link {
    Checkpoint source;
    Checkpoint target;
    friend auto operator<=>(const Link &, const Link &) = default;
  };

  /// validator id -> the link it votes for in one step.
  using VoteAssignment = std::map<int, Link>;

  class CheckpointTree {
   public:
    explicit CheckpointTree(int n);

    int n() const {
      return n_;
    }
    /// floor(2n/3) + 1.
    int supermajority() const {
      return 2 * n_ / 3 + 1;
    }
    const std::map<Link, std::set<int>> &votes() const {
      return votes_;
    }
    const std::set<Checkpoint> &justified() const {
      return justified_;
    }
    bool is_justified(const Checkpoint &c) const {
      return justified_.contains(c);
    }
    Checkpoint highest_justified() const;
    /// Highest level carrying a voted checkpoint.
    int height() const;

    friend CheckpointTree casper_step(const CheckpointTree &tree,
                                      const VoteAssignment &votes);

   private:
    void recompute();

    int n_;
    std::map<Link, std::set<int>> votes_;
    std::set<Checkpoint> justified_;
  };

  /**
   * Records the votes and recomputes the justified set. Throws
   * std::invalid_argument for an unknown validator, a link that does not
   * go upwards from a justified source, or a second vote by one validator
   * for links between the same pair of levels.
   */
  CheckpointTree casper_step(const CheckpointTree &tree,
                             const VoteAssignment &votes);

  /**
   * K attempts from genesis at levels 1..K, each split evenly over three
   * blocks, followed by a control step where every validator votes one
   * block at level K+1. Requires n >= 3 and n divisible by 3.
   */
  ScenarioReport replay_casper(int n, int k);

}  // namespace bftmc::scenarios

#endif  // BFTMC_SCENARIOS_HPP
