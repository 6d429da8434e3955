/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <stdexcept>

#include "bftmc/scenarios.hpp"

namespace bftmc::scenarios {

  std::string to_string(const Checkpoint &c) {
    if (c == kGenesis) {
      return "genesis";
    }
    return std::to_string(c.height) + "/" + std::to_string(c.block);
  }

  CheckpointTree::CheckpointTree(int n) : n_(n) {
    if (n < 1) {
      throw std::invalid_argument("need at least one validator");
    }
    justified_.insert(kGenesis);
  }

  Checkpoint CheckpointTree::highest_justified() const {
    return *justified_.rbegin();
  }

  int CheckpointTree::height() const {
    int h = 0;
    for (const auto &[link, who] : votes_) {
      h = std::max(h, link.target.height);
    }
    return h;
  }

  void CheckpointTree::recompute() {
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto &[link, who] : votes_) {
        if (justified_.contains(link.source) &&
            !justified_.contains(link.target) &&
            static_cast<int>(who.size()) >= supermajority()) {
          justified_.insert(link.target);
          grew = true;
        }
      }
    }
  }

  CheckpointTree casper_step(const CheckpointTree &tree,
                             const VoteAssignment &votes) {
    CheckpointTree next = tree;
    for (const auto &[v, link] : votes) {
      if (v < 0 || v >= tree.n()) {
        throw std::invalid_argument("unknown validator " + std::to_string(v));
      }
      if (link.target.height <= link.source.height) {
        throw std::invalid_argument("link " + to_string(link.source) + " -> " +
                                    to_string(link.target) +
                                    " does not go upwards");
      }
      if (!tree.is_justified(link.source)) {
        throw std::invalid_argument("source " + to_string(link.source) +
                                    " is not justified");
      }
      for (const auto &[other, who] : tree.votes()) {
        if (who.contains(v) && other.source.height == link.source.height &&
            other.target.height == link.target.height) {
          throw std::invalid_argument(
              "validator " + std::to_string(v) +
              " already voted a link from level " +
              std::to_string(link.source.height) + " to level " +
              std::to_string(link.target.height));
        }
      }
      next.votes_[link].insert(v);
    }
    next.recompute();
    return next;
  }

  ScenarioReport replay_casper(int n, int k) {
    if (n < 3 || n % 3 != 0) {
      throw std::invalid_argument("validator count must be a multiple of 3");
    }
    if (k < 1) {
      throw std::invalid_argument("need at least one attempt");
    }
    ScenarioReport rep;
    rep.scenario = "casper";
    CheckpointTree tree(n);
    rep.setup["validators"] = n;
    rep.setup["supermajority"] = tree.supermajority();
    rep.setup["attempts"] = k;

    bool only_genesis = true;
    bool monotone = true;
    std::string genesis_detail;
    std::string monotone_detail;

    for (int a = 1; a <= k; ++a) {
      VoteAssignment votes;
      for (int v = 0; v < n; ++v) {
        votes[v] = Link{kGenesis, Checkpoint{a, v / (n / 3)}};
      }
      auto before = tree.justified();
      tree = casper_step(tree, votes);

      for (const auto &c : before) {
        if (!tree.is_justified(c) && monotone) {
          monotone = false;
          monotone_detail = "attempt " + std::to_string(a) + " unjustified " +
                            to_string(c);
        }
      }
      if (tree.justified() != std::set<Checkpoint>{kGenesis} && only_genesis) {
        only_genesis = false;
        genesis_detail = "attempt " + std::to_string(a) + ": highest justified " +
                         to_string(tree.highest_justified());
      }

      ojson o;
      o["attempt"] = a;
      o["level"] = a;
      std::string split;
      for (int b = 0; b < 3; ++b) {
        auto it = tree.votes().find(Link{kGenesis, Checkpoint{a, b}});
        split += (b ? "/" : "") +
                 std::to_string(it == tree.votes().end() ? 0 : it->second.size());
      }
      o["votes"] = split;
      o["tree_height"] = tree.height();
      o["highest_justified"] = to_string(tree.highest_justified());
      rep.observations.push_back(std::move(o));
    }

    // Control: one unanimous vote at the next level.
    const Checkpoint next{k + 1, 0};
    VoteAssignment unanimous;
    for (int v = 0; v < n; ++v) {
      unanimous[v] = Link{kGenesis, next};
    }
    auto control = casper_step(tree, unanimous);
    ojson o;
    o["attempt"] = "control";
    o["level"] = k + 1;
    o["votes"] = std::to_string(n);
    o["tree_height"] = control.height();
    o["highest_justified"] = to_string(control.highest_justified());
    rep.observations.push_back(std::move(o));

    rep.claim("genesis is the only justified checkpoint after every split "
              "attempt",
              only_genesis, genesis_detail);
    rep.claim("justified set never shrinks", monotone, monotone_detail);
    rep.claim("a unanimous follow-up justifies level " + std::to_string(k + 1),
              control.is_justified(next),
              "highest justified after control: " +
                  to_string(control.highest_justified()));
    return rep;
  }

}  // namespace bftmc::scenarios
