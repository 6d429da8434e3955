/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/core.hpp"

#include <sstream>

namespace bftmc {

  std::optional<std::string> validate_params(const Params &p,
                                             bool allow_unsafe) {
    std::vector<std::string> failed;
    if (p.n < 1) {
      failed.emplace_back("n >= 1 fails");
    }
    if (p.t < 0) {
      failed.emplace_back("t >= 0 fails");
    }
    if (p.f < 0) {
      failed.emplace_back("f >= 0 fails");
    }
    if (p.f > p.t) {
      failed.emplace_back("f <= t fails");
    }
    bool structural = !failed.empty();
    if (p.n <= 3 * p.t) {
      failed.emplace_back("n > 3t fails");
    }
    if (failed.empty() || (allow_unsafe && !structural)) {
      return std::nullopt;
    }
    std::string out;
    for (const auto &s : failed) {
      if (!out.empty()) {
        out += "; ";
      }
      out += s;
    }
    return out;
  }

  Thresholds thresholds(const Params &p) {
    return {p.t + 1, 2 * p.t + 1, p.n - p.t};
  }

  std::string BinSet::to_string() const {
    switch (bits_) {
      case 0:
        return "{}";
      case 1:
        return "{0}";
      case 2:
        return "{1}";
      default:
        return "{0,1}";
    }
  }

  const char *to_string(MsgKind k) {
    return k == MsgKind::bv ? "BV" : "ECHO";
  }

  std::optional<MsgKind> parse_kind(const std::string &s) {
    if (s == "BV") {
      return MsgKind::bv;
    }
    if (s == "ECHO") {
      return MsgKind::echo;
    }
    return std::nullopt;
  }

  void check_message(const Message &m, const Params &p) {
    if (m.round < 1) {
      throw std::invalid_argument("message round must be >= 1");
    }
    if (static_cast<int>(m.sender) >= p.n) {
      throw std::invalid_argument("message sender " + std::to_string(m.sender)
                                  + " out of range for n="
                                  + std::to_string(p.n));
    }
  }

  std::string to_string(const Message &m) {
    std::ostringstream os;
    os << to_string(m.kind) << "(r=" << m.round << ",v=" << to_int(m.value)
       << ",from=p" << m.sender << ")";
    return os.str();
  }

  int RecvLedger::record(const Message &m) {
    if (m.sender >= static_cast<ProcessId>(kMaxProcesses)) {
      throw std::invalid_argument("sender id exceeds ledger capacity");
    }
    auto &mask = senders_[Key{m.kind, m.round, m.value}];
    mask |= std::uint64_t{1} << m.sender;
    return std::popcount(mask);
  }

  int RecvLedger::count(MsgKind kind, Round round, BinVal value) const {
    return std::popcount(senders(kind, round, value));
  }

  bool RecvLedger::has(MsgKind kind,
                       Round round,
                       BinVal value,
                       ProcessId sender) const {
    return (senders(kind, round, value) >> sender) & 1U;
  }

  std::uint64_t RecvLedger::senders(MsgKind kind,
                                    Round round,
                                    BinVal value) const {
    auto it = senders_.find(Key{kind, round, value});
    return it == senders_.end() ? 0 : it->second;
  }

  int RecvLedger::count_any(MsgKind kind, Round round) const {
    return std::popcount(senders(kind, round, BinVal::zero)
                         | senders(kind, round, BinVal::one));
  }

}  // namespace bftmc
