/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_CORE_HPP
#define BFTMC_CORE_HPP

#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bftmc {

  /// Concrete machines identify processes with a 64-bit sender mask.
  inline constexpr int kMaxProcesses = 64;

  using ProcessId = std::uint32_t;
  using Round = std::uint32_t;

  /**
   * The resilience triple: n processes, at most t Byzantine assumed, f
   * actually Byzantine. Byzantine processes are the top f identifiers.
   */
  struct Params {
    int n = 0;
    int t = 0;
    int f = 0;

    int correct() const {
      return n - f;
    }
    bool is_byzantine(ProcessId p) const {
      return static_cast<int>(p) >= n - f;
    }

    friend bool operator==(const Params &, const Params &) = default;
  };

  /**
   * Returns nullopt when the parameters are admissible. Otherwise returns
   * every failed inequality joined by "; ". With allow_unsafe only the
   * resilience bound n > 3t may fail.
   */
  std::optional<std::string> validate_params(const Params &p,
                                             bool allow_unsafe);

  struct Thresholds {
    int weak;      // t + 1
    int majority;  // 2t + 1
    int quorum;    // n - t

    friend bool operator==(const Thresholds &, const Thresholds &) = default;
  };

  Thresholds thresholds(const Params &p);

  enum class BinVal : std::uint8_t { zero = 0, one = 1 };

  inline constexpr BinVal kBinVals[] = {BinVal::zero, BinVal::one};

  constexpr int to_int(BinVal v) {
    return static_cast<int>(v);
  }
  constexpr BinVal bin(int v) {
    return v == 0 ? BinVal::zero : BinVal::one;
  }
  constexpr BinVal operator!(BinVal v) {
    return v == BinVal::zero ? BinVal::one : BinVal::zero;
  }
  constexpr BinVal parity(Round r) {
    return bin(static_cast<int>(r % 2));
  }

  /// A subset of {0, 1}.
  class BinSet {
   public:
    constexpr BinSet() = default;
    constexpr BinSet(std::initializer_list<BinVal> vs) {
      for (auto v : vs) {
        insert(v);
      }
    }

    constexpr bool contains(BinVal v) const {
      return (bits_ >> to_int(v)) & 1U;
    }
    constexpr void insert(BinVal v) {
      bits_ = static_cast<std::uint8_t>(bits_ | (1U << to_int(v)));
    }
    constexpr bool empty() const {
      return bits_ == 0;
    }
    constexpr int size() const {
      return std::popcount(bits_);
    }
    constexpr bool both() const {
      return bits_ == 3;
    }
    constexpr std::uint8_t bits() const {
      return bits_;
    }
    /// The sole element; only meaningful when size() == 1.
    constexpr BinVal only() const {
      return bits_ == 2 ? BinVal::one : BinVal::zero;
    }

    std::string to_string() const;

    friend constexpr auto operator<=>(const BinSet &,
                                      const BinSet &) = default;

   private:
    std::uint8_t bits_ = 0;
  };

  enum class MsgKind : std::uint8_t { bv = 0, echo = 1 };

  const char *to_string(MsgKind k);
  std::optional<MsgKind> parse_kind(const std::string &s);

  struct Message {
    MsgKind kind = MsgKind::bv;
    Round round = 1;
    BinVal value = BinVal::zero;
    ProcessId sender = 0;

    friend auto operator<=>(const Message &, const Message &) = default;
  };

  /// Throws std::invalid_argument unless round >= 1 and sender < n.
  void check_message(const Message &m, const Params &p);

  std::string to_string(const Message &m);

  /**
   * Distinct-sender accounting per (kind, round, value). Recording is
   * idempotent; equivocation (one sender under both values) is allowed.
   */
  class RecvLedger {
   public:
    struct Key {
      MsgKind kind;
      Round round;
      BinVal value;
      friend auto operator<=>(const Key &, const Key &) = default;
    };

    /// Adds the sender and returns the new distinct-sender count of the key.
    int record(const Message &m);

    int count(MsgKind kind, Round round, BinVal value) const;
    bool has(MsgKind kind, Round round, BinVal value, ProcessId sender) const;
    std::uint64_t senders(MsgKind kind, Round round, BinVal value) const;
    /// Distinct senders of `kind` in `round` over both values.
    int count_any(MsgKind kind, Round round) const;

    const std::map<Key, std::uint64_t> &entries() const {
      return senders_;
    }

    friend bool operator==(const RecvLedger &, const RecvLedger &) = default;

   private:
    std::map<Key, std::uint64_t> senders_;
  };

}  // namespace bftmc

#endif  // BFTMC_CORE_HPP
