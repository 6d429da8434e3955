/**
 * Copyright the bftmc authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bftmc/cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bftmc/builtin.hpp"
#include "bftmc/consensus.hpp"
#include "bftmc/oracle.hpp"
#include "bftmc/scenarios.hpp"
#include "bftmc/simnet.hpp"
#include "bftmc/ta_parser.hpp"
#include "bftmc/trace_json.hpp"

namespace bftmc::cli {

  using ojson = nlohmann::ordered_json;

  int exit_code(check::Verdict::Kind k) {
    switch (k) {
      case check::Verdict::Kind::holds:
        return kExitOk;
      case check::Verdict::Kind::violated:
        return kExitViolated;
      case check::Verdict::Kind::unknown_at_bound:
        return kExitUnknown;
    }
    return kExitError;
  }

  int combine(int a, int b) {
    auto rank = [](int c) {
      switch (c) {
        case kExitError:
          return 3;
        case kExitViolated:
          return 2;
        case kExitUnknown:
          return 1;
        default:
          return 0;
      }
    };
    return rank(a) >= rank(b) ? a : b;
  }

  namespace {

    /// A usage or input problem; reported and mapped to exit 2.
    struct UsageError : std::runtime_error {
      using std::runtime_error::runtime_error;
    };

    struct Config {
      std::string model;
      int n = 0;
      int t = 0;
      int f = 0;
      std::string spec = "all";
      Round rounds = 0;
      std::string coin;
      std::string scenario;
      std::string format = "json";
      std::uint64_t state_budget = 0;
      int workers = 1;
      bool allow_unsafe = false;
      std::string output;
      std::string schedule;
      std::string trace;
      std::string inputs = "unanimous";
      std::string proposals;
      std::string justice = "as-written";
      int seeds = 100;
    };

    std::string read_file(const std::string &path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        throw UsageError("cannot read " + path);
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }

    ojson read_json(const std::string &path) {
      try {
        return ojson::parse(read_file(path));
      } catch (const nlohmann::json::parse_error &e) {
        throw UsageError(path + ": " + e.what());
      }
    }

    Params params_of(const Config &c) {
      return Params{c.n, c.t, c.f};
    }

    check::Options check_options(const Config &c) {
      check::Options o;
      o.state_budget = c.state_budget ? c.state_budget
                                      : check::state_budget_from_env();
      o.workers = c.workers;
      o.justice = c.justice == "correct-only"
                      ? check::JusticeGuards::correct_only
                      : check::JusticeGuards::as_written;
      return o;
    }

    std::shared_ptr<const ta::ThresholdAutomatonModel> load_model(
        const std::string &source) {
      if (source == "bv") {
        return std::make_shared<const ta::ThresholdAutomatonModel>(
            ta::builtin_bv());
      }
      auto parsed = ta::parse_ta(read_file(source));
      if (auto *diags = std::get_if<std::vector<ta::Diagnostic>>(&parsed)) {
        std::string msg = source + ": invalid model";
        for (const auto &d : *diags) {
          msg += "\n  " + source + ":" + d.to_string();
        }
        throw UsageError(msg);
      }
      return std::make_shared<const ta::ThresholdAutomatonModel>(
          std::get<ta::ThresholdAutomatonModel>(std::move(parsed)));
    }

    ta::Instance make_instance(
        std::shared_ptr<const ta::ThresholdAutomatonModel> m,
        const Params &p,
        bool unsafe) {
      try {
        return ta::Instance(std::move(m), p, unsafe);
      } catch (const ta::ModelError &e) {
        throw UsageError(e.what());
      } catch (const std::invalid_argument &e) {
        throw UsageError(std::string(e.what()) +
                         (unsafe ? "" : " (use --allow-unsafe to override)"));
      }
    }

    consensus::Inputs parse_inputs(const std::string &s) {
      if (s == "all") {
        return consensus::Inputs::all;
      }
      if (s == "all-zero") {
        return consensus::Inputs::all_zero;
      }
      if (s == "all-one") {
        return consensus::Inputs::all_one;
      }
      return consensus::Inputs::unanimous;
    }

    std::vector<BinVal> parse_bits(const std::string &s, const char *what) {
      std::vector<BinVal> out;
      std::stringstream in(s);
      std::string item;
      while (std::getline(in, item, ',')) {
        if (item != "0" && item != "1") {
          throw UsageError(std::string(what) + " entries must be 0 or 1");
        }
        out.push_back(bin(item[0] - '0'));
      }
      return out;
    }

    void emit(const Config &c, const std::string &text, std::ostream &out) {
      if (c.output.empty()) {
        out << text;
        return;
      }
      std::ofstream f(c.output, std::ios::binary);
      if (!f || !(f << text)) {
        throw UsageError("cannot write " + c.output);
      }
    }

    ojson report_json(const std::string &command, std::vector<ojson> results,
                      int code) {
      ojson j;
      j["schema"] = "bftmc-report/1";
      j["command"] = command;
      j["results"] = std::move(results);
      j["exit_code"] = code;
      return j;
    }

    // ---- check ----------------------------------------------------------

    int check_automaton(const Config &c, std::ostream &out, std::ostream &err) {
      auto opts = check_options(c);
      std::vector<std::pair<std::string, std::shared_ptr<const ta::ThresholdAutomatonModel>>>
          models;
      if (c.model == "dbft") {
        for (BinVal v : {BinVal::one, BinVal::zero}) {
          models.emplace_back("dbft", std::make_shared<const ta::ThresholdAutomatonModel>(
                                          ta::builtin_dbft_round(v)));
        }
      } else {
        models.emplace_back(c.model, load_model(c.model));
      }

      int code = kExitOk;
      std::vector<ojson> docs;
      std::string text;
      for (const auto &[source, model] : models) {
        auto inst = make_instance(model, params_of(c), c.allow_unsafe);
        auto specs = check::select_specs(*model, c.spec);
        if (specs.empty()) {
          std::string names;
          for (const auto &s : model->specs) {
            names += " " + s.name;
          }
          throw UsageError("no spec matches '" + c.spec + "'; available:" +
                           names);
        }
        for (const auto *s : specs) {
          auto v = check::check_spec(inst, *s, opts);
          auto doc = trace_json::document(inst, source, s->name, v);
          if (auto bad = trace_json::validate(inst, doc)) {
            err << "internal error: witness for " << s->name
                << " does not replay: " << *bad << "\n";
            return kExitError;
          }
          code = combine(code, exit_code(v.kind));
          text += trace_json::document_text(doc);
          docs.push_back(std::move(doc));
        }
      }
      if (c.format == "text") {
        emit(c, text, out);
      } else {
        emit(c, report_json("check", std::move(docs), code).dump(2) + "\n", out);
      }
      return code;
    }

    std::vector<std::string> consensus_properties(const std::string &sel) {
      std::vector<std::string> out;
      for (const char *p : consensus::kProperties) {
        std::string name = p;
        if (sel == "all" || sel == name ||
            (name.size() == sel.size() + 1 && name.starts_with(sel))) {
          out.push_back(name);
        }
      }
      if (out.empty()) {
        throw UsageError("no consensus property matches '" + sel +
                         "'; available: agreement validity0 validity1 "
                         "termination");
      }
      return out;
    }

    int check_consensus(const Config &c, std::ostream &out, std::ostream &err) {
      consensus::RoundModelFactory factory = ta::builtin_dbft_round;
      consensus::Options opts;
      opts.check = check_options(c);
      opts.termination_inputs = parse_inputs(c.inputs);
      opts.allow_unsafe = c.allow_unsafe;
      Params p = params_of(c);
      if (auto bad = validate_params(p, c.allow_unsafe)) {
        throw UsageError(*bad);
      }

      int code = kExitOk;
      std::vector<ojson> docs;
      std::string text;
      for (const auto &prop : consensus_properties(c.spec)) {
        consensus::Result r;
        try {
          r = consensus::check_consensus(factory, p, c.rounds, prop, opts);
        } catch (const std::invalid_argument &e) {
          throw UsageError(e.what());
        }
        auto doc = trace_json::document(factory, p, "dbft", r, c.allow_unsafe);
        doc["model"]["inputs"] = c.inputs;
        if (auto bad = trace_json::validate(factory, p, doc, c.allow_unsafe)) {
          err << "internal error: witness for " << prop
              << " does not replay: " << *bad << "\n";
          return kExitError;
        }
        code = combine(code, exit_code(r.kind));
        text += trace_json::document_text(doc);
        docs.push_back(std::move(doc));
      }
      if (c.format == "text") {
        emit(c, text, out);
      } else {
        emit(c, report_json("check", std::move(docs), code).dump(2) + "\n", out);
      }
      return code;
    }

    // ---- replay ---------------------------------------------------------

    int emit_scenario(const Config &c, const scenarios::ScenarioReport &r,
                      std::ostream &out) {
      emit(c,
           c.format == "text" ? scenarios::to_text(r)
                              : scenarios::to_json(r).dump(2) + "\n",
           out);
      return r.passed() ? kExitOk : kExitViolated;
    }

    int replay_honeybadger(const Config &c, std::ostream &out) {
      Round k = c.rounds;
      scenarios::CoinOracle coin;
      try {
        if (!c.coin.empty()) {
          coin = scenarios::CoinOracle::parse(c.coin);
          k = k ? k : coin.size();
        } else {
          k = k ? k : 10;
          coin = scenarios::CoinOracle::alternating(k);
        }
        std::array<BinVal, 3> in{BinVal::zero, BinVal::one, BinVal::one};
        if (!c.proposals.empty()) {
          auto v = parse_bits(c.proposals, "--proposals");
          if (v.size() != 3) {
            throw UsageError("--proposals needs three values");
          }
          std::copy(v.begin(), v.end(), in.begin());
        }
        return emit_scenario(c, scenarios::replay_honeybadger(in, coin, k).report,
                             out);
      } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
      }
    }

    template <class State>
    ojson machines_json(const simnet::World<State> &w) {
      ojson a = ojson::array();
      for (const auto &m : w.machines) {
        ojson j;
        j["process"] = m.self;
        if constexpr (std::is_same_v<State, BvState>) {
          j["broadcast"] = m.broadcast.to_string();
          j["delivered"] = m.conts.to_string();
        } else {
          j["round"] = m.r;
          j["est"] = to_int(m.est);
          j["decided"] = m.decided ? ojson(to_int(m.decided->value)) : ojson();
        }
        a.push_back(std::move(j));
      }
      return a;
    }

    template <class State>
    int run_schedule_file(const Config &c, simnet::World<State> w,
                          const simnet::Handler<State> &handle,
                          std::ostream &out) {
      simnet::Schedule s;
      try {
        s = simnet::schedule_from_json(nlohmann::json::parse(read_file(c.schedule)));
      } catch (const nlohmann::json::exception &e) {
        throw UsageError(c.schedule + ": " + e.what());
      } catch (const std::invalid_argument &e) {
        throw UsageError(c.schedule + ": " + e.what());
      }
      try {
        simnet::run_schedule(w, s, handle);
      } catch (const simnet::ScheduleError &e) {
        throw UsageError(c.schedule + ": " + e.what());
      }
      ojson j;
      j["schema"] = "bftmc-log/1";
      j["model"] = c.model;
      j["params"] = ojson{{"n", c.n}, {"t", c.t}, {"f", c.f}};
      j["steps"] = w.steps;
      j["log"] = ojson::parse(simnet::to_json(w.log).dump());
      j["machines"] = machines_json(w);
      j["inflight"] = w.inflight.size();
      if (c.format == "text") {
        std::string text;
        for (const auto &e : w.log) {
          text += "step " + std::to_string(e.step) + " p" +
                  std::to_string(e.process + 1) + " " + to_string(e.event) +
                  "\n";
        }
        emit(c, text, out);
      } else {
        emit(c, j.dump(2) + "\n", out);
      }
      return kExitOk;
    }

    int replay_schedule(const Config &c, std::ostream &out) {
      Params p = params_of(c);
      if (auto bad = validate_params(p, c.allow_unsafe)) {
        throw UsageError(*bad);
      }
      auto in = parse_bits(c.proposals, "--proposals");
      if (static_cast<int>(in.size()) != p.correct()) {
        throw UsageError("--proposals needs one value per correct process (" +
                         std::to_string(p.correct()) + ")");
      }
      if (c.model == "bv") {
        return run_schedule_file(c, simnet::bv_world(p, in),
                                 simnet::bv_handler(p), out);
      }
      if (c.model == "dbft") {
        return run_schedule_file(c, simnet::dbft_world(p, in),
                                 simnet::dbft_handler(p), out);
      }
      if (c.model == "honeybadger") {
        auto coin = c.coin.empty() ? scenarios::CoinOracle::alternating(64)
                                   : scenarios::CoinOracle::parse(c.coin);
        CoinFn fn = [coin](Round r) { return coin(r); };
        return run_schedule_file(c, simnet::hb_world(p, in),
                                 simnet::hb_handler(p, fn), out);
      }
      throw UsageError("--schedule needs --model bv, dbft or honeybadger");
    }

    std::optional<std::string> validate_document(const Config &c,
                                                 const ojson &doc) {
      const auto &m = doc.at("model");
      const auto &pj = m.at("params");
      Params p{pj.at("n").get<int>(), pj.at("t").get<int>(),
               pj.at("f").get<int>()};
      auto source = m.at("source").get<std::string>();
      if (m.contains("rounds")) {
        return trace_json::validate(
            consensus::RoundModelFactory(ta::builtin_dbft_round), p, doc,
            c.allow_unsafe);
      }
      std::shared_ptr<const ta::ThresholdAutomatonModel> model;
      if (source == "dbft") {
        auto name = m.at("name").get<std::string>();
        model = std::make_shared<const ta::ThresholdAutomatonModel>(
            ta::builtin_dbft_round(name.ends_with("0") ? BinVal::zero
                                                      : BinVal::one));
      } else {
        model = load_model(source);
      }
      return trace_json::validate(make_instance(model, p, c.allow_unsafe), doc);
    }

    // Accepts a single trace document or a report holding several.
    int replay_trace(const Config &c, std::ostream &out) {
      auto doc = read_json(c.trace);
      std::string text;
      int code = kExitOk;
      try {
        std::vector<ojson> docs;
        if (doc.contains("results")) {
          docs = doc.at("results").get<std::vector<ojson>>();
        } else {
          docs.push_back(doc);
        }
        for (const auto &d : docs) {
          auto name = d.at("property").get<std::string>();
          if (auto bad = validate_document(c, d)) {
            text += name + ": witness does not replay: " + *bad + "\n";
            code = kExitViolated;
          } else {
            text += name + ": " +
                    (d.contains("witness") ? "witness replays" : "no witness") +
                    "\n";
          }
        }
      } catch (const nlohmann::json::exception &e) {
        throw UsageError(c.trace + ": " + e.what());
      }
      emit(c, text, out);
      return code;
    }

    // ---- explore --------------------------------------------------------

    ojson schedule_ojson(const simnet::Schedule &s) {
      return ojson::parse(simnet::to_json(s).dump());
    }

    int explore(const Config &c, std::ostream &out) {
      if (c.model != "bv") {
        throw UsageError("explore supports --model bv");
      }
      Params p = params_of(c);
      auto inst = make_instance(std::make_shared<const ta::ThresholdAutomatonModel>(
                                    ta::builtin_bv()),
                                p, c.allow_unsafe);
      std::uint64_t cap = c.state_budget ? c.state_budget : 5'000'000;
      oracle::Report rep;
      std::optional<simnet::Schedule> unjustified;
      try {
        rep = oracle::oracle_equiv(inst, std::nullopt, cap);
        unjustified = oracle::find_unjustified_delivery(p, cap);
      } catch (const simnet::ResourceError &e) {
        throw UsageError(e.what());
      }

      ojson j;
      j["schema"] = "bftmc-explore/1";
      j["params"] = ojson{{"n", p.n}, {"t", p.t}, {"f", p.f}};
      ojson splits = ojson::array();
      std::string text;
      for (const auto &s : rep.splits) {
        ojson e;
        e["zeros"] = s.zeros;
        e["checker_states"] = s.checker_states;
        e["simnet_states"] = s.simnet_states;
        ojson proj = ojson::array();
        for (const auto &pr : s.simnet) {
          proj.push_back(oracle::to_string(pr));
        }
        e["simnet_projections"] = std::move(proj);
        e["equal"] = s.checker == s.simnet;
        text += "split zeros=" + std::to_string(s.zeros) + ": " +
                std::to_string(s.checker.size()) + " automaton / " +
                std::to_string(s.simnet.size()) + " machine projections, " +
                (s.checker == s.simnet ? "equal" : "DIFFERENT") + "\n";
        splits.push_back(std::move(e));
      }
      j["splits"] = std::move(splits);
      j["equal"] = rep.equal;
      if (rep.first) {
        j["discrepancy"] = rep.first->describe();
        text += rep.first->describe() + "\n";
      }
      j["unjustified_delivery"] =
          unjustified ? schedule_ojson(*unjustified) : ojson();
      text += unjustified ? "a correct process delivers an unproposed value\n"
                          : "no correct process delivers an unproposed value\n";
      emit(c, c.format == "text" ? text : j.dump(2) + "\n", out);
      return rep.equal && !unjustified ? kExitOk : kExitViolated;
    }

  }  // namespace

  int run(std::span<const std::string> args, std::ostream &out,
          std::ostream &err) {
    Config c;
    CLI::App app{"Explicit-state checker and simulator for Byzantine consensus "
                 "protocols",
                 "bftmc"};
    app.require_subcommand(1);

    auto params = [&](CLI::App *sub) {
      sub->add_option("--n", c.n, "number of processes");
      sub->add_option("--t", c.t, "resilience bound");
      sub->add_option("--f", c.f, "actual Byzantine processes");
      sub->add_flag("--allow-unsafe", c.allow_unsafe,
                    "accept parameters that break the resilience condition");
      sub->add_option("--format", c.format, "output format")
          ->check(CLI::IsMember({"json", "text"}));
      sub->add_option("--output", c.output, "write results to this file");
    };

    auto *check = app.add_subcommand("check", "model-check properties");
    params(check);
    check->add_option("--model", c.model, "bv, dbft or a .ta file")->required();
    check->add_option("--spec", c.spec, "all, a spec name or a family");
    auto *check_rounds = check->add_option(
        "--rounds", c.rounds, "round bound of the consensus composition (dbft)");
    check_rounds->check(CLI::PositiveNumber);
    auto *check_inputs =
        check->add_option("--inputs", c.inputs, "input splits for termination")
            ->check(CLI::IsMember({"all", "unanimous", "all-zero", "all-one"}));
    check->add_option("--state-budget", c.state_budget,
                      "maximum number of stored states");
    check->add_option("--workers", c.workers, "expansion threads")
        ->check(CLI::PositiveNumber);
    check->add_option("--justice", c.justice,
                      "what counts as applicable for fairness")
        ->check(CLI::IsMember({"as-written", "correct-only"}));

    auto *replay = app.add_subcommand(
        "replay", "run a scripted scenario, a schedule, or re-check a witness");
    params(replay);
    replay->add_option("--scenario", c.scenario)
        ->check(CLI::IsMember({"honeybadger", "honeybadger-fair", "casper"}));
    auto *replay_coin = replay->add_option("--coin", c.coin, "e.g. 1,0,1,0");
    replay->add_option("--rounds", c.rounds, "rounds or attempts")
        ->check(CLI::PositiveNumber);
    replay->add_option("--seeds", c.seeds, "runs of the fair control")
        ->check(CLI::PositiveNumber);
    replay->add_option("--model", c.model, "bv, dbft or honeybadger");
    replay->add_option("--schedule", c.schedule, "JSON list of actions");
    replay->add_option("--proposals", c.proposals, "inputs, e.g. 0,1,1");
    replay->add_option("--trace", c.trace, "trace document to re-check");

    auto *explore_cmd = app.add_subcommand(
        "explore", "exhaustive simulation of the broadcast machines");
    params(explore_cmd);
    explore_cmd->add_option("--model", c.model, "bv")->required();
    explore_cmd->add_option("--state-budget", c.state_budget,
                            "maximum number of simulator states per split");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
      app.parse(argv);
    } catch (const CLI::ParseError &e) {
      int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitError;
    }

    try {
      if (check->parsed()) {
        bool consensus = check_rounds->count() > 0;
        if (consensus && c.model != "dbft") {
          throw UsageError("--rounds applies only to --model dbft");
        }
        if (check_inputs->count() > 0 && !consensus) {
          throw UsageError("--inputs applies only to the consensus check "
                           "(--model dbft --rounds R)");
        }
        return consensus ? check_consensus(c, out, err)
                         : check_automaton(c, out, err);
      }
      if (replay->parsed()) {
        int modes = !c.scenario.empty() + !c.schedule.empty() + !c.trace.empty();
        if (modes != 1) {
          throw UsageError("replay needs exactly one of --scenario, "
                           "--schedule, --trace");
        }
        if (replay_coin->count() > 0 && c.scenario != "honeybadger" &&
            c.model != "honeybadger") {
          throw UsageError("--coin applies only to the honeybadger replay");
        }
        if (c.scenario == "honeybadger") {
          if (c.n || c.t || c.f) {
            throw UsageError("the honeybadger scenario fixes n=4, t=1, f=1");
          }
          return replay_honeybadger(c, out);
        }
        if (c.scenario == "honeybadger-fair") {
          Round bound = c.rounds ? c.rounds : 20;
          auto ctl = scenarios::hb_fair_control(c.seeds, bound);
          return emit_scenario(c, scenarios::control_report(ctl, bound), out);
        }
        if (c.scenario == "casper") {
          try {
            return emit_scenario(
                c, scenarios::replay_casper(c.n ? c.n : 9,
                                            static_cast<int>(c.rounds ? c.rounds : 20)),
                out);
          } catch (const std::invalid_argument &e) {
            throw UsageError(e.what());
          }
        }
        if (!c.schedule.empty()) {
          return replay_schedule(c, out);
        }
        return replay_trace(c, out);
      }
      return explore(c, out);
    } catch (const UsageError &e) {
      err << "bftmc: " << e.what() << "\n";
      return kExitError;
    } catch (const check::ResourceError &e) {
      err << "bftmc: " << e.what() << "\n";
      return kExitError;
    } catch (const simnet::ResourceError &e) {
      err << "bftmc: " << e.what() << "\n";
      return kExitError;
    }
  }

}  // namespace bftmc::cli
