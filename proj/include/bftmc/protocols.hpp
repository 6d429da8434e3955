/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_PROTOCOLS_HPP
#define BFTMC_PROTOCOLS_HPP

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "bftmc/core.hpp"

namespace bftmc {

  struct Delivered {
    BinVal value;
    friend bool operator==(const Delivered &, const Delivered &) = default;
  };
  struct Decided {
    BinVal value;
    Round round;
    friend bool operator==(const Decided &, const Decided &) = default;
  };
  struct RoundAdvanced {
    Round round;
    friend bool operator==(const RoundAdvanced &,
                           const RoundAdvanced &) = default;
  };
  using Event = std::variant<Delivered, Decided, RoundAdvanced>;

  std::string to_string(const Event &e);

  /// Result of a pure transition: the successor state plus what it emitted.
  template <class State>
  struct StepOutput {
    State state;
    std::vector<Message> out_msgs;
    std::vector<Event> events;
  };

  // ---------------------------------------------------------------------
  // BV-broadcast

  /**
   * One process running a single BV-broadcast instance. `round` tags the
   * instance so that several instances can share a network.
   */
  struct BvState {
    ProcessId self = 0;
    Round round = 1;
    BinSet broadcast;
    BinSet conts;
    RecvLedger ledger;

    friend bool operator==(const BvState &, const BvState &) = default;
  };

  StepOutput<BvState> bv_init(ProcessId self,
                              BinVal v,
                              const Params &p,
                              Round round = 1);

  /// Messages of another instance are ignored; non-BV kinds are rejected.
  StepOutput<BvState> bv_handle(const BvState &s,
                                const Message &m,
                                const Params &p);

  // ---------------------------------------------------------------------
  // DBFT binary consensus variant

  enum class DbftPhase : std::uint8_t { bv, echo };

  struct Decision {
    BinVal value;
    Round round;
    friend bool operator==(const Decision &, const Decision &) = default;
  };

  struct DbftState {
    ProcessId self = 0;
    BinVal est = BinVal::zero;
    Round r = 1;
    DbftPhase phase = DbftPhase::bv;
    /// Values with 2t+1 distinct BV senders in round r.
    BinSet echoes;
    /// BV values this process already sent in round r.
    BinSet bv_sent;
    std::optional<Decision> decided;
    bool halted = false;
    RecvLedger ledger;

    friend bool operator==(const DbftState &, const DbftState &) = default;
  };

  StepOutput<DbftState> dbft_propose(ProcessId self,
                                     BinVal v,
                                     const Params &p);

  /**
   * Records m (whatever its round) and runs the current-round logic to a
   * fixpoint. A process that decided in round d halts once it completes
   * round d + 2 and emits nothing afterwards.
   */
  StepOutput<DbftState> dbft_handle(const DbftState &s,
                                    const Message &m,
                                    const Params &p);

  // ---------------------------------------------------------------------
  // Randomized binary consensus (HoneyBadger's binary agreement)

  struct RoundOutcome {
    enum class Kind : std::uint8_t { decide, estimate };
    Kind kind;
    BinVal value;
    friend bool operator==(const RoundOutcome &,
                           const RoundOutcome &) = default;
  };

  /// values = {c} decides c; {!c} estimates !c; {0,1} estimates c.
  RoundOutcome hb_round_outcome(BinSet values, BinVal coin);

  using CoinFn = std::function<BinVal(Round)>;

  /**
   * A full randomized-consensus process: BV-broadcast, one AUX message per
   * round (carried as an ECHO), n - t AUX messages over delivered values
   * close the round, and hb_round_outcome against the common coin picks the
   * next estimate.
   */
  struct HbState {
    ProcessId self = 0;
    BinVal est = BinVal::zero;
    Round r = 1;
    BinSet bv_sent;
    BinSet conts;
    bool aux_sent = false;
    /// conts and values of the last completed round.
    BinSet last_conts;
    BinSet last_values;
    std::optional<Decision> decided;
    RecvLedger ledger;

    friend bool operator==(const HbState &, const HbState &) = default;
  };

  StepOutput<HbState> hb_propose(ProcessId self, BinVal v, const Params &p);
  StepOutput<HbState> hb_handle(const HbState &s,
                                const Message &m,
                                const Params &p,
                                const CoinFn &coin);

}  // namespace bftmc

#endif  // BFTMC_PROTOCOLS_HPP
