#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mbx/decide.hpp"
#include "mbx/format.hpp"
#include "mbx/oracle.hpp"

namespace mbx::cli {

namespace {

using nlohmann::json;

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Emitter {
  bool asJson = false;
  std::ostream& out;

  int verdict(const std::string& command, const Cfm& cfm, const Verdict& v,
              const std::string& yesText, const std::string& noText) {
    if (asJson) {
      json j;
      j["command"] = command;
      j["verdict"] = v.answer == Answer::Yes  ? "yes"
                     : v.answer == Answer::No ? "no"
                                              : "budget-exceeded";
      if (v.witness) {
        json w = json::array();
        for (const Action& a : *v.witness) w.push_back(cfm.actionText(a));
        j["witness"] = w;
      }
      if (v.k) j["k"] = *v.k;
      j["stats"] = {{"states", v.stats.statesExplored}, {"millis", v.stats.millis}};
      if (!v.detail.empty()) j["detail"] = v.detail;
      out << j.dump(2) << "\n";
    } else {
      switch (v.answer) {
        case Answer::Yes:
          out << "yes: " << yesText;
          if (v.k) out << " (k = " << *v.k << ")";
          out << "\n";
          break;
        case Answer::No:
          out << "no: " << noText << "\n";
          if (v.witness) {
            out << "witness:\n";
            for (const Action& a : *v.witness) out << "  " << cfm.actionText(a) << "\n";
          }
          break;
        case Answer::BudgetExceeded:
          out << "budget exceeded: " << v.detail << "\n";
          break;
      }
      out << "states: " << v.stats.statesExplored << ", millis: " << v.stats.millis << "\n";
    }
    return v.answer == Answer::Yes ? kExitYes : v.answer == Answer::No ? kExitNo : kExitBudget;
  }
};

std::vector<LocalState> parseGoal(const Cfm& cfm, const std::string& spec) {
  std::vector<std::optional<LocalState>> goal(cfm.processCount());
  std::stringstream in(spec);
  std::string part;
  while (std::getline(in, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw Error("goal entries must look like process=state");
    std::string pname = part.substr(0, eq);
    std::string sname = part.substr(eq + 1);
    auto p = cfm.processByName(pname);
    if (!p) throw Error("unknown process '" + pname + "' in goal");
    auto s = cfm.stateByName(*p, sname);
    if (!s) throw Error("unknown state '" + sname + "' of process '" + pname + "'");
    goal[*p] = *s;
  }
  std::vector<LocalState> out;
  for (std::size_t p = 0; p < cfm.processCount(); ++p) {
    if (!goal[p]) throw Error("goal must fix a state for process '" + cfm.processes[p].name + "'");
    out.push_back(*goal[p]);
  }
  return out;
}

ProcessNetwork netFor(const Cfm& cfm, const std::string& semantics) {
  if (semantics == "mb") return ProcessNetwork::mailbox(cfm.processCount());
  if (semantics == "p2p") return ProcessNetwork::p2p(cfm.processCount());
  throw Error("semantics must be 'mb' or 'p2p'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Round-based verification for mailbox communicating machines"};
  app.require_subcommand(1);

  bool asJson = false;
  std::uint64_t budget = 1'000'000;
  app.add_flag("--json", asJson, "machine-readable report");
  app.add_option("--budget", budget, "explored-state cap per decision");

  std::string file, propertyFile, traceFile, goalSpec, semantics = "mb", format = "dot";
  std::string engineName = "exact", outFile = "out.cfm", gadgetName;
  std::uint64_t kValue = 1;
  std::size_t maxExchange = 6, maxLen = 20;
  std::uint32_t seed = 1;
  bool verifySync = false;
  std::vector<std::string> nfaFiles;

  auto* check = app.add_subcommand("check", "decision procedures");
  auto* checkSync = check->add_subcommand("sync", "round-schedulability");
  checkSync->add_option("file", file)->required();
  checkSync->add_option("--engine", engineName)->check(CLI::IsMember({"exact", "bounded"}));
  checkSync->add_option("--max-exchange", maxExchange, "bounded engine: sends per round");
  auto* checkKsync = check->add_subcommand("ksync", "bounded-round schedulability");
  checkKsync->add_option("file", file)->required();
  checkKsync->add_option("--k", kValue)->required();
  auto* checkMbsim = check->add_subcommand("mbsim", "mailbox reschedulability of p2p runs");
  checkMbsim->add_option("file", file)->required();

  auto* reach = app.add_subcommand("reach", "global-state reachability");
  reach->add_option("file", file)->required();
  reach->add_option("--goal", goalSpec)->required();
  reach->add_flag("--verify-sync", verifySync);

  auto* inferK = app.add_subcommand("infer-k", "least round bound, if any");
  inferK->add_option("file", file)->required();

  auto* modelCheck = app.add_subcommand("model-check", "regular property on annotated traces");
  modelCheck->add_option("file", file)->required();
  modelCheck->add_option("--property", propertyFile)->required();

  auto* simulate = app.add_subcommand("simulate", "random walk or trace replay");
  simulate->add_option("file", file)->required();
  simulate->add_option("--semantics", semantics)->check(CLI::IsMember({"mb", "p2p"}));
  simulate->add_option("--max-len", maxLen);
  simulate->add_option("--seed", seed);
  simulate->add_option("--trace", traceFile, "replay this trace instead of walking");

  auto* exportCmd = app.add_subcommand("export", "DOT renderings");
  exportCmd->add_option("file", file)->required();
  exportCmd->add_option("--trace", traceFile)->required();
  exportCmd->add_option("--format", format)
      ->check(CLI::IsMember({"dot", "comm-dot", "cond-dot"}));
  exportCmd->add_option("--semantics", semantics)->check(CLI::IsMember({"mb", "p2p"}));

  auto* gen = app.add_subcommand("gen", "benchmark generators");
  auto* genInter = gen->add_subcommand("intersection", "letter-relay ring");
  genInter->add_option("nfas", nfaFiles)->required()->expected(-2);
  genInter->add_option("--gadget", gadgetName)->check(CLI::IsMember({"nonsync", "nonsim"}));
  genInter->add_option("-o,--out", outFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitYes;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    Emitter emit{asJson, out};
    DecideOptions base;
    base.budget = budget;

    if (checkSync->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      SyncOptions options;
      options.budget = budget;
      options.engine = engineName == "exact" ? SyncEngine::Exact : SyncEngine::Bounded;
      options.maxExchangeSends = maxExchange;
      options.maxTotalSends = std::max<std::size_t>(maxExchange, 10);
      Verdict v = check_sync(cfm, options);
      return emit.verdict("check sync", cfm, v, "every mailbox trace is round-schedulable",
                          "a mailbox trace admits no round rescheduling");
    }
    if (checkKsync->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      SyncOptions options;
      options.budget = budget;
      Verdict v = check_ksync(cfm, kValue, options);
      return emit.verdict("check ksync", cfm, v,
                          "schedulable with at most " + std::to_string(kValue) + " sends per round",
                          "not schedulable within the requested round size");
    }
    if (checkMbsim->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      Verdict v = check_mbsim(cfm, base);
      return emit.verdict("check mbsim", cfm, v,
                          "every peer-to-peer trace reschedules onto mailboxes",
                          "a peer-to-peer trace has no mailbox rescheduling");
    }
    if (reach->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      if (verifySync) {
        SyncOptions options;
        options.budget = budget;
        Verdict s = check_sync(cfm, options);
        if (!s.yes()) {
          err << "error: the system is not round-schedulable; reachability over rounds "
                 "would be unsound\n";
          return kExitInput;
        }
      }
      Verdict v = reachable(cfm, parseGoal(cfm, goalSpec), base);
      return emit.verdict("reach", cfm, v, "the global state is reachable",
                          "the global state is not reachable over round-structured runs");
    }
    if (inferK->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      SyncOptions options;
      options.budget = budget;
      Verdict v = infer_k(cfm, options);
      return emit.verdict("infer-k", cfm, v, "a finite round bound exists",
                          "no finite round bound exists");
    }
    if (modelCheck->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      ExplicitNfa property = property_from_text(parse_nfa_text(slurp(propertyFile)), cfm);
      Verdict v = model_check(cfm, property, base);
      return emit.verdict("model-check", cfm, v, "every round-structured trace satisfies the property",
                          "a round-structured trace violates the property");
    }
    if (simulate->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      ProcessNetwork net = netFor(cfm, semantics);
      if (!traceFile.empty()) {
        Trace t = parse_trace(slurp(traceFile), cfm);
        auto res = ::mbx::run(cfm, net, t);
        if (res.ok()) {
          out << "replayed " << t.size() << " actions\n";
          return kExitYes;
        }
        out << "blocked at action " << res.failedIndex + 1 << ": "
            << cfm.actionText(t[res.failedIndex]) << "\n";
        return kExitNo;
      }
      std::mt19937 rng(seed);
      Configuration conf = initial_configuration(cfm, net);
      for (std::size_t i = 0; i < maxLen; ++i) {
        auto enabled = enabled_actions(cfm, net, conf);
        if (enabled.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
        Action a = enabled[pick(rng)];
        out << cfm.actionText(a) << "\n";
        conf = *step(cfm, net, conf, a);
      }
      return kExitYes;
    }
    if (exportCmd->parsed()) {
      Cfm cfm = parse_cfm(slurp(file));
      Trace t = parse_trace(slurp(traceFile), cfm);
      ProcessNetwork net = netFor(cfm, semantics);
      if (format == "dot") {
        out << msc_to_dot(msc_of(t), cfm);
      } else if (format == "comm-dot") {
        out << comm_graph_to_dot(comm_graph(t, net), t, cfm);
      } else {
        out << condensation_to_dot(t, net, cfm);
      }
      return kExitYes;
    }
    if (genInter->parsed()) {
      std::vector<TextNfa> nfas;
      for (const auto& path : nfaFiles) nfas.push_back(parse_nfa_text(slurp(path)));
      Gadget gadget = Gadget::None;
      if (gadgetName == "nonsync") gadget = Gadget::NonSync;
      if (gadgetName == "nonsim") gadget = Gadget::NonSim;
      Cfm cfm = gen_benchmark(nfas, gadget);
      std::ofstream file_out(outFile);
      if (!file_out) throw Error("cannot write '" + outFile + "'");
      file_out << render_cfm(cfm);
      out << "wrote " << outFile << " (" << cfm.processCount() << " processes, size "
          << cfm.size() << ")\n";
      return kExitYes;
    }
    err << "usage error: no subcommand\n";
    return kExitInput;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace mbx::cli
