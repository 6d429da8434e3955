/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/scenarios.hpp"

#include <sstream>
#include <stdexcept>

namespace bftmc::scenarios {

  CoinOracle CoinOracle::parse(const std::string &text) {
    std::vector<BinVal> vs;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item == "0" || item == "1") {
        vs.push_back(bin(item[0] - '0'));
      } else {
        throw std::invalid_argument("coin entries must be 0 or 1, got '" +
                                    item + "'");
      }
    }
    if (vs.empty()) {
      throw std::invalid_argument("empty coin sequence");
    }
    return CoinOracle(std::move(vs));
  }

  CoinOracle CoinOracle::alternating(Round k) {
    std::vector<BinVal> vs;
    for (Round r = 1; r <= k; ++r) {
      vs.push_back(parity(r));
    }
    return CoinOracle(std::move(vs));
  }

  BinVal CoinOracle::operator()(Round r) const {
    if (r < 1 || r > size()) {
      throw std::out_of_range("coin undefined for round " + std::to_string(r));
    }
    return values_[r - 1];
  }

  std::string CoinOracle::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      s += (i ? "," : "") + std::to_string(to_int(values_[i]));
    }
    return s;
  }

  bool ScenarioReport::passed() const {
    for (const auto &c : claims) {
      if (!c.passed) {
        return false;
      }
    }
    return true;
  }

  void ScenarioReport::claim(std::string name, bool ok, std::string detail) {
    claims.push_back({std::move(name), ok, ok ? std::string{} : std::move(detail)});
  }

  ojson to_json(const ScenarioReport &r) {
    ojson j;
    j["schema"] = "bftmc-scenario/1";
    j["scenario"] = r.scenario;
    j["setup"] = r.setup;
    j["observations"] = r.observations;
    ojson claims = ojson::array();
    for (const auto &c : r.claims) {
      ojson e;
      e["claim"] = c.name;
      e["passed"] = c.passed;
      if (!c.passed) {
        e["detail"] = c.detail;
      }
      claims.push_back(std::move(e));
    }
    j["claims"] = std::move(claims);
    j["passed"] = r.passed();
    return j;
  }

  namespace {

    std::string scalar(const ojson &v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    }

  }  // namespace

  std::string to_text(const ScenarioReport &r) {
    std::ostringstream os;
    os << "scenario " << r.scenario << "\n";
    for (const auto &[k, v] : r.setup.items()) {
      os << "  " << k << " = " << scalar(v) << "\n";
    }
    for (const auto &o : r.observations) {
      os << " ";
      for (const auto &[k, v] : o.items()) {
        os << " " << k << "=" << scalar(v);
      }
      os << "\n";
    }
    for (const auto &c : r.claims) {
      os << (c.passed ? "PASS " : "FAIL ") << c.name;
      if (!c.passed) {
        os << ": " << c.detail;
      }
      os << "\n";
    }
    os << (r.passed() ? "all claims hold" : "some claims failed") << "\n";
    return os.str();
  }

}  // namespace bftmc::scenarios
