/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef BFTMC_TRACE_JSON_HPP
#define BFTMC_TRACE_JSON_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "bftmc/checker.hpp"
#include "bftmc/consensus.hpp"
#include "bftmc/ta.hpp"

// JSON documents for verdicts and witnesses; layout in docs/trace-schema.md.
namespace bftmc::trace_json {

  using ojson = nlohmann::ordered_json;

  inline constexpr const char *kSchema = "bftmc-trace/1";

  ojson to_json(const ta::Instance &inst, const ta::Configuration &c);
  ta::Configuration configuration_from_json(const ta::Instance &inst,
                                            const ojson &j);

  ojson to_json(const ta::Instance &inst, const check::Step &s);
  ojson to_json(const ta::Instance &inst, const check::Witness &w);

  /// Throws std::invalid_argument naming the offending field.
  check::Witness witness_from_json(const ta::Instance &inst, const ojson &j);

  /// `source` names the model as given on the command line.
  ojson document(const ta::Instance &inst,
                 const std::string &source,
                 const std::string &property,
                 const check::Verdict &v,
                 bool timing = true);

  ojson document(const consensus::RoundModelFactory &factory,
                 const Params &p,
                 const std::string &source,
                 const consensus::Result &r,
                 bool allow_unsafe = false,
                 bool timing = true);

  consensus::ConsensusWitness consensus_witness_from_json(
      const consensus::RoundModelFactory &factory,
      const Params &p,
      const ojson &j,
      bool allow_unsafe = false);

  /// Parses the document's witness and replays it; nullopt when it checks
  /// out or the document carries no witness.
  std::optional<std::string> validate(const ta::Instance &inst,
                                      const ojson &doc);
  std::optional<std::string> validate(
      const consensus::RoundModelFactory &factory,
      const Params &p,
      const ojson &doc,
      bool allow_unsafe = false);

  /// One line per step: "rule: from -> to when (guard) do (updates)".
  std::string to_text(const ta::Instance &inst, const check::Witness &w);
  std::string to_text(const ta::Instance &inst, const ta::Configuration &c);

  /// Human-readable form of a document produced by `document`.
  std::string document_text(const ojson &doc);

}  // namespace bftmc::trace_json

#endif  // BFTMC_TRACE_JSON_HPP
