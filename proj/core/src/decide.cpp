#include "mbx/decide.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <set>

namespace mbx {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::uint64_t millis() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// One send of a round, with its annotation.
struct RoundSend {
  Action action;
  bool annotated;
};
using RoundRun = std::vector<std::vector<RoundSend>>;  // one vector per round

/// Rebuilds a concrete round-structured trace: per round, the sends in order
/// followed by the receives of the plain sends, ordered as their sends.
Trace round_run_to_trace(const RoundRun& run) {
  Trace out;
  for (const auto& block : run) {
    for (const auto& s : block) out.push_back(s.action);
    for (const auto& s : block)
      if (!s.annotated) out.push_back(receive(s.action.peer, s.action.actor, s.action.message));
  }
  return out;
}

/// Breadth-first search over rounds of an inner automaton (the lift with
/// explicit round boundaries). Block opens and closes cost nothing, sends
/// cost one, so reported runs carry a minimal number of sends. Also used to
/// enumerate every reachable (inner state, deaf set) boundary pair.
class RoundSearch {
 public:
  RoundSearch(Nfa& inner, std::vector<std::pair<std::uint32_t, DeafSet>> starts,
              std::function<bool(std::uint32_t, DeafSet)> finals)
      : inner_(inner), starts_(std::move(starts)), finals_(std::move(finals)) {}

  std::optional<RoundRun> shortestRun(Budget& budget, DecisionStats& stats) {
    found_.reset();
    explore(budget, /*stopAtFinal=*/true);
    stats.statesExplored += states_.size();
    return found_;
  }

  struct BoundaryPair {
    std::uint32_t inner;
    DeafSet deaf;
    RoundRun run;
  };

  std::vector<BoundaryPair> boundaryPairs(Budget& budget, DecisionStats& stats) {
    explore(budget, /*stopAtFinal=*/false);
    stats.statesExplored += states_.size();
    std::vector<BoundaryPair> out;
    for (std::size_t id = 0; id < states_.size(); ++id) {
      const State& s = states_[id];
      if (s.middle) continue;
      out.push_back(BoundaryPair{s.first, s.deaf, decode(static_cast<std::int64_t>(id))});
    }
    return out;
  }

 private:
  struct State {
    bool middle;
    std::uint32_t first, second, hat;
    DeafSet deaf;
    friend auto operator<=>(const State&, const State&) = default;
  };
  struct Crumb {
    std::int64_t parent;  // state id
    std::int8_t kind;     // 0 open, 1 send, 2 close
    RoundSend send;
  };

  std::uint32_t intern(const State& s, std::int64_t parent, std::int8_t kind,
                       const RoundSend& send, bool* fresh) {
    auto it = index_.find(s);
    if (it != index_.end()) {
      *fresh = false;
      return it->second;
    }
    std::uint32_t id = static_cast<std::uint32_t>(states_.size());
    states_.push_back(s);
    crumbs_.push_back(Crumb{parent, kind, send});
    index_.emplace(s, id);
    *fresh = true;
    return id;
  }

  const std::vector<std::uint32_t>& sendReach(std::uint32_t from) {
    auto it = reachCache_.find(from);
    if (it != reachCache_.end()) return it->second;
    std::set<std::uint32_t> seen{from};
    std::deque<std::uint32_t> todo{from};
    while (!todo.empty()) {
      std::uint32_t cur = todo.front();
      todo.pop_front();
      inner_.expand(cur, [&](const Letter& l, std::uint32_t next) {
        if (l.isSendLike() && seen.insert(next).second) todo.push_back(next);
      });
    }
    auto [ins, _] = reachCache_.emplace(from, std::vector<std::uint32_t>(seen.begin(), seen.end()));
    return ins->second;
  }

  RoundRun decode(std::int64_t id) const {
    std::vector<Crumb> rev;
    for (std::int64_t cur = id; cur >= 0; cur = crumbs_[cur].parent) {
      rev.push_back(crumbs_[cur]);
      if (crumbs_[cur].parent == cur) break;
    }
    std::reverse(rev.begin(), rev.end());
    RoundRun run;
    std::vector<RoundSend> block;
    for (const Crumb& c : rev) {
      if (c.kind == 1) block.push_back(c.send);
      if (c.kind == 2) {
        run.push_back(block);
        block.clear();
      }
    }
    return run;
  }

  void explore(Budget& budget, bool stopAtFinal) {
    std::deque<std::uint32_t> frontier;
    auto pushState = [&](const State& s, std::int64_t parent, std::int8_t kind,
                         const RoundSend& send, bool cheap) {
      bool fresh = false;
      std::uint32_t id = intern(s, parent, kind, send, &fresh);
      if (!fresh) return;
      budget.charge();
      if (cheap)
        frontier.push_front(id);
      else
        frontier.push_back(id);
    };

    for (auto [b, d] : starts_) {
      State s{false, b, 0, 0, d};
      bool fresh = false;
      std::uint32_t id = intern(s, -1, 0, RoundSend{}, &fresh);
      if (fresh) frontier.push_back(id);
    }

    while (!frontier.empty()) {
      std::uint32_t id = frontier.front();
      frontier.pop_front();
      State s = states_[id];
      if (!s.middle) {
        if (finals_(s.first, s.deaf)) {
          if (!found_) found_ = decode(id);
          if (stopAtFinal) return;
        }
        for (std::uint32_t hat : sendReach(s.first))
          pushState(State{true, s.first, hat, hat, s.deaf}, id, 0, RoundSend{}, true);
        continue;
      }
      // Close the round once the send walk has met the guessed middle state.
      if (s.first == s.hat)
        pushState(State{false, s.second, 0, 0, s.deaf}, id, 2, RoundSend{}, true);
      inner_.expand(s.first, [&](const Letter& l, std::uint32_t fnext) {
        if (!l.isSendLike()) return;
        const Action& a = l.action;
        if (l.kind == LetterKind::Send) {
          if (deafContains(s.deaf, a.peer)) return;
          for (std::uint32_t snext :
               inner_.successors(s.second, receiveLetter(receive(a.peer, a.actor, a.message))))
            pushState(State{true, fnext, snext, s.hat, s.deaf}, id, 1, RoundSend{a, false}, false);
        } else {
          pushState(State{true, fnext, s.second, s.hat, deafAdd(s.deaf, a.peer)}, id, 1,
                    RoundSend{a, true}, false);
        }
      });
    }
  }

  Nfa& inner_;
  std::vector<std::pair<std::uint32_t, DeafSet>> starts_;
  std::function<bool(std::uint32_t, DeafSet)> finals_;
  std::vector<State> states_;
  std::vector<Crumb> crumbs_;
  std::map<State, std::uint32_t> index_;
  std::map<std::uint32_t, std::vector<std::uint32_t>> reachCache_;
  std::optional<RoundRun> found_;
};

Verdict budgetExceededVerdict(const Stopwatch& watch, const DecisionStats& stats,
                              const BudgetExceeded& e) {
  Verdict v;
  v.answer = Answer::BudgetExceeded;
  v.stats = stats;
  v.stats.millis = watch.millis();
  v.detail = e.what();
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Reachability

Verdict reachable(const Cfm& cfm, const std::vector<LocalState>& goal,
                  const DecideOptions& options) {
  Stopwatch watch;
  Verdict v;
  Budget budget(options.budget);
  SystemNfa system(cfm);
  if (goal.size() != cfm.processCount()) throw Error("goal must name every process state");
  std::uint32_t goalId = system.table().intern(goal);
  std::uint32_t init = system.table().initial();
  RoundSearch search(system, {{init, 0}},
                     [goalId](std::uint32_t b, DeafSet) { return b == goalId; });
  try {
    auto run = search.shortestRun(budget, v.stats);
    if (run) {
      v.answer = Answer::Yes;
      v.witness = round_run_to_trace(*run);
    } else {
      v.answer = Answer::No;
    }
  } catch (const BudgetExceeded& e) {
    return budgetExceededVerdict(watch, v.stats, e);
  }
  v.stats.millis = watch.millis();
  return v;
}

// ---------------------------------------------------------------------------
// Receive closure and model checking

bool check_r_closed(const ExplicitNfa& property, std::string* offender) {
  ExplicitNfa min = minimal_dfa(determinize(property));
  Budget budget(1'000'000);
  return check_r_diamond(min, budget, offender);
}

Verdict model_check(const Cfm& cfm, const ExplicitNfa& property, const DecideOptions& options) {
  Stopwatch watch;
  std::string offender;
  if (!check_r_closed(property, &offender))
    throw Error("property is not closed under commuting receives: " + offender);

  Verdict v;
  Budget budget(options.budget);
  auto system = std::make_shared<SystemNfa>(cfm);
  auto violations = std::make_shared<ExplicitNfa>(minimal_dfa(complement(property)));
  auto inner = std::make_shared<ProductNfa>(system, violations);

  std::vector<std::pair<std::uint32_t, DeafSet>> starts;
  for (std::uint32_t s : inner->initials()) starts.emplace_back(s, 0);
  RoundSearch search(*inner, starts,
                     [&](std::uint32_t b, DeafSet) { return inner->accepting(b); });
  try {
    auto run = search.shortestRun(budget, v.stats);
    if (run) {
      v.answer = Answer::No;
      v.witness = round_run_to_trace(*run);
      v.detail = "annotated trace violates the property";
    } else {
      v.answer = Answer::Yes;
    }
  } catch (const BudgetExceeded& e) {
    return budgetExceededVerdict(watch, v.stats, e);
  }
  v.stats.millis = watch.millis();
  return v;
}

// ---------------------------------------------------------------------------
// Mailbox similarity

namespace {

/// The system product with acceptance at global states that enable a given
/// receive (the right derivative by that receive).
class ReceiveEnabledNfa : public Nfa {
 public:
  ReceiveEnabledNfa(std::shared_ptr<SystemNfa> inner, const Action& r)
      : inner_(std::move(inner)), r_(r) {}

  const std::vector<Letter>& alphabet() const override { return inner_->alphabet(); }
  std::vector<std::uint32_t> initials() override { return inner_->initials(); }
  bool accepting(std::uint32_t s) override { return inner_->table().hasReceiveTransition(s, r_); }
  void expand(std::uint32_t s,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override {
    inner_->expand(s, sink);
  }
  std::string describe(std::uint32_t s) override { return inner_->describe(s); }
  std::size_t statesInterned() const override { return inner_->statesInterned(); }

 private:
  std::shared_ptr<SystemNfa> inner_;
  Action r_;
};

}  // namespace

Verdict check_mbsim(const Cfm& cfm, const DecideOptions& options) {
  Stopwatch watch;
  Verdict v;
  Budget budget(options.budget);

  // Receives that some process can actually perform.
  std::set<Action> receives;
  for (const auto& p : cfm.processes)
    for (const auto& t : p.transitions)
      if (t.action.isReceive()) receives.insert(t.action);

  try {
    for (const Action& r : receives) {
      auto system = std::make_shared<SystemNfa>(cfm);
      auto derivative = std::make_shared<ReceiveEnabledNfa>(system, r);
      auto pr = std::shared_ptr<Nfa>(similarity_nfa(cfm, r));
      auto inner = std::make_shared<ProductNfa>(derivative, pr);
      std::vector<std::pair<std::uint32_t, DeafSet>> starts;
      for (std::uint32_t s : inner->initials()) starts.emplace_back(s, 0);
      RoundSearch search(*inner, starts,
                         [&](std::uint32_t b, DeafSet) { return inner->accepting(b); });
      auto run = search.shortestRun(budget, v.stats);
      if (run) {
        Trace witness = round_run_to_trace(*run);
        witness.push_back(r);
        v.answer = Answer::No;
        v.witness = std::move(witness);
        v.detail = "peer-to-peer trace has no mailbox rescheduling";
        v.stats.millis = watch.millis();
        return v;
      }
    }
  } catch (const BudgetExceeded& e) {
    return budgetExceededVerdict(watch, v.stats, e);
  }
  v.answer = Answer::Yes;
  v.stats.millis = watch.millis();
  return v;
}

// ---------------------------------------------------------------------------
// Round bounds

namespace {

struct AtomicAnalysis {
  bool sawAccepting = false;
  bool cyclic = false;
  std::uint64_t longest = 0;          // sends of the longest accepted word (acyclic case)
  std::vector<RoundSend> longWord;    // a witness exchange of maximal length
  std::vector<RoundSend> pumpedWord;  // cyclic case: an accepted word longer than requested
};

/// Explores the atomic-exchange recognizer from one boundary pair, trims it
/// to accepting paths, and measures word lengths.
AtomicAnalysis analyze_atomic(const Cfm& cfm, const std::vector<LocalState>& from, DeafSet d,
                              Budget& budget, std::uint64_t pumpPast) {
  AtomicAnalysis out;
  auto nfa = atomic_exchange_nfa(cfm, from, d);

  struct EdgeT {
    std::uint32_t from, to;
    RoundSend send;
  };
  std::vector<EdgeT> edges;
  std::vector<std::uint32_t> order;
  std::set<std::uint32_t> seen;
  std::deque<std::uint32_t> todo;
  for (std::uint32_t s : nfa->initials())
    if (seen.insert(s).second) todo.push_back(s);
  while (!todo.empty()) {
    std::uint32_t s = todo.front();
    todo.pop_front();
    budget.charge();
    order.push_back(s);
    nfa->expand(s, [&](const Letter& l, std::uint32_t next) {
      edges.push_back(EdgeT{s, next, RoundSend{l.action, l.kind == LetterKind::BarredSend}});
      if (seen.insert(next).second) todo.push_back(next);
    });
  }

  std::map<std::uint32_t, std::vector<std::size_t>> inEdges, outEdges;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    outEdges[edges[i].from].push_back(i);
    inEdges[edges[i].to].push_back(i);
  }

  // Co-reachable: backward from accepting states.
  std::set<std::uint32_t> coreach;
  for (std::uint32_t s : order)
    if (nfa->accepting(s)) {
      coreach.insert(s);
      todo.push_back(s);
      out.sawAccepting = true;
    }
  while (!todo.empty()) {
    std::uint32_t s = todo.front();
    todo.pop_front();
    for (std::size_t e : inEdges[s])
      if (coreach.insert(edges[e].from).second) todo.push_back(edges[e].from);
  }
  if (!out.sawAccepting) return out;

  auto trimmed = [&](std::uint32_t s) { return coreach.count(s) > 0; };

  // Cycle detection on the trimmed part (iterative DFS, colors).
  std::map<std::uint32_t, int> color;
  std::optional<std::uint32_t> cycleState;
  for (std::uint32_t root : order) {
    if (!trimmed(root) || color[root]) continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty() && !cycleState) {
      auto& [s, idx] = stack.back();
      const auto& outs = outEdges[s];
      bool advanced = false;
      while (idx < outs.size()) {
        std::uint32_t t = edges[outs[idx]].to;
        ++idx;
        if (!trimmed(t)) continue;
        if (color[t] == 1) {
          cycleState = t;
          break;
        }
        if (color[t] == 0) {
          color[t] = 1;
          stack.emplace_back(t, 0);
          advanced = true;
          break;
        }
      }
      if (cycleState) break;
      if (!advanced && idx >= outs.size()) {
        color[s] = 2;
        stack.pop_back();
      }
    }
    if (cycleState) break;
  }

  auto shortestPath = [&](const std::vector<std::uint32_t>& fromSet, auto isGoal,
                          bool useTrimmed) -> std::optional<std::vector<std::size_t>> {
    std::map<std::uint32_t, std::pair<std::int64_t, std::size_t>> parent;  // state -> (prev, edge)
    std::deque<std::uint32_t> q;
    for (std::uint32_t s : fromSet) {
      if (useTrimmed && !trimmed(s)) continue;
      if (!parent.count(s)) {
        parent[s] = {-1, 0};
        q.push_back(s);
      }
    }
    while (!q.empty()) {
      std::uint32_t s = q.front();
      q.pop_front();
      if (isGoal(s)) {
        std::vector<std::size_t> path;
        std::uint32_t cur = s;
        while (parent[cur].first >= 0) {
          path.push_back(parent[cur].second);
          cur = static_cast<std::uint32_t>(parent[cur].first);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      for (std::size_t e : outEdges[s]) {
        std::uint32_t t = edges[e].to;
        if (useTrimmed && !trimmed(t)) continue;
        if (!parent.count(t)) {
          parent[t] = {s, e};
          q.push_back(t);
        }
      }
    }
    return std::nullopt;
  };

  if (cycleState) {
    out.cyclic = true;
    // Pump: initial -> cycle state, loop until past the requested size, then
    // out to an accepting state.
    auto initsVec = nfa->initials();
    auto toCycle = shortestPath(initsVec, [&](std::uint32_t s) { return s == *cycleState; }, true);
    std::vector<std::size_t> loop;
    {
      std::vector<std::uint32_t> fromSet;
      for (std::size_t e : outEdges[*cycleState])
        if (trimmed(edges[e].to)) fromSet.push_back(edges[e].to);
      // One loop = first edge out of the cycle state plus shortest way back.
      for (std::size_t e : outEdges[*cycleState]) {
        if (!trimmed(edges[e].to)) continue;
        auto back =
            shortestPath({edges[e].to}, [&](std::uint32_t s) { return s == *cycleState; }, true);
        if (back) {
          loop.push_back(e);
          loop.insert(loop.end(), back->begin(), back->end());
          break;
        }
      }
    }
    auto toAccept =
        shortestPath({*cycleState}, [&](std::uint32_t s) { return nfa->accepting(s); }, true);
    if (toCycle && !loop.empty() && toAccept) {
      std::vector<std::size_t> path = *toCycle;
      while (path.size() < pumpPast + 1) path.insert(path.end(), loop.begin(), loop.end());
      path.insert(path.end(), toAccept->begin(), toAccept->end());
      for (std::size_t e : path) out.pumpedWord.push_back(edges[e].send);
    }
    return out;
  }

  // Acyclic trimmed part: longest accepted word by dynamic programming over a
  // topological order.
  std::vector<std::uint32_t> topo;
  std::map<std::uint32_t, std::size_t> indeg;
  for (std::uint32_t s : order)
    if (trimmed(s)) indeg[s] = 0;
  for (const auto& e : edges)
    if (trimmed(e.from) && trimmed(e.to)) ++indeg[e.to];
  std::deque<std::uint32_t> ready;
  std::set<std::uint32_t> initset(nfa->initials().begin(), nfa->initials().end());
  for (auto& [s, deg] : indeg)
    if (deg == 0) ready.push_back(s);
  while (!ready.empty()) {
    std::uint32_t s = ready.front();
    ready.pop_front();
    topo.push_back(s);
    for (std::size_t e : outEdges[s]) {
      std::uint32_t t = edges[e].to;
      if (!trimmed(t)) continue;
      if (--indeg[t] == 0) ready.push_back(t);
    }
  }
  std::map<std::uint32_t, std::pair<std::int64_t, std::size_t>> best;  // len, in-edge
  for (std::uint32_t s : topo) {
    if (initset.count(s) && !best.count(s)) best[s] = {0, SIZE_MAX};
    if (!best.count(s)) continue;
    for (std::size_t e : outEdges[s]) {
      std::uint32_t t = edges[e].to;
      if (!trimmed(t)) continue;
      std::int64_t len = best[s].first + 1;
      if (!best.count(t) || best[t].first < len) best[t] = {len, e};
    }
  }
  std::uint32_t argmax = 0;
  std::int64_t maxLen = -1;
  for (std::uint32_t s : topo) {
    if (!nfa->accepting(s) || !best.count(s)) continue;
    if (best[s].first > maxLen) {
      maxLen = best[s].first;
      argmax = s;
    }
  }
  if (maxLen >= 0) {
    out.longest = static_cast<std::uint64_t>(maxLen);
    std::uint32_t cur = argmax;
    std::vector<RoundSend> rev;
    while (best[cur].second != SIZE_MAX) {
      rev.push_back(edges[best[cur].second].send);
      cur = edges[best[cur].second].from;
    }
    std::reverse(rev.begin(), rev.end());
    out.longWord = std::move(rev);
  }
  return out;
}

struct RoundBoundScan {
  bool cyclic = false;
  std::uint64_t maxLen = 0;
  Trace witnessTrace;   // prefix + oversized exchange, when one was found
  bool haveWitness = false;
};

RoundBoundScan scan_round_bounds(const Cfm& cfm, std::uint64_t overLimit, Budget& budget,
                                 DecisionStats& stats) {
  RoundBoundScan out;
  SystemNfa system(cfm);
  RoundSearch search(system, {{system.table().initial(), 0}},
                     [](std::uint32_t, DeafSet) { return false; });
  auto pairs = search.boundaryPairs(budget, stats);
  for (const auto& pair : pairs) {
    auto analysis = analyze_atomic(cfm, system.table().locals(pair.inner), pair.deaf, budget,
                                   overLimit);
    stats.statesExplored += 1;
    auto buildWitness = [&](const std::vector<RoundSend>& word) {
      RoundRun run = pair.run;
      run.push_back(word);
      return round_run_to_trace(run);
    };
    if (analysis.cyclic) {
      out.cyclic = true;
      if (!analysis.pumpedWord.empty() && !out.haveWitness) {
        out.witnessTrace = buildWitness(analysis.pumpedWord);
        out.haveWitness = true;
      }
      return out;
    }
    if (analysis.sawAccepting && analysis.longest > out.maxLen) {
      out.maxLen = analysis.longest;
      out.witnessTrace = buildWitness(analysis.longWord);
      out.haveWitness = true;
    }
  }
  return out;
}

}  // namespace

Verdict check_ksync(const Cfm& cfm, std::uint64_t k, const SyncOptions& options) {
  Stopwatch watch;
  Verdict sync = check_sync(cfm, options);
  if (!sync.yes()) {
    sync.stats.millis = watch.millis();
    if (sync.no()) sync.detail = "system is not round-schedulable at all";
    return sync;
  }
  Verdict v;
  v.stats = sync.stats;
  Budget budget(options.budget);
  try {
    RoundBoundScan scan = scan_round_bounds(cfm, k, budget, v.stats);
    if (scan.cyclic || scan.maxLen > k) {
      v.answer = Answer::No;
      if (scan.haveWitness && scan.cyclic) v.witness = scan.witnessTrace;
      if (!scan.cyclic && scan.haveWitness) v.witness = scan.witnessTrace;
      v.detail = scan.cyclic ? "rounds grow without bound" : "a larger round is unavoidable";
    } else {
      v.answer = Answer::Yes;
      v.k = k;
    }
  } catch (const BudgetExceeded& e) {
    return budgetExceededVerdict(watch, v.stats, e);
  }
  v.stats.millis = watch.millis();
  return v;
}

Verdict infer_k(const Cfm& cfm, const SyncOptions& options) {
  Stopwatch watch;
  Verdict sync = check_sync(cfm, options);
  if (!sync.yes()) {
    sync.stats.millis = watch.millis();
    if (sync.no()) sync.detail = "system is not round-schedulable at all";
    return sync;
  }
  Verdict v;
  v.stats = sync.stats;
  Budget budget(options.budget);
  try {
    RoundBoundScan scan = scan_round_bounds(cfm, 1, budget, v.stats);
    if (scan.cyclic) {
      v.answer = Answer::No;
      if (scan.haveWitness) v.witness = scan.witnessTrace;
      v.detail = "rounds grow without bound";
    } else {
      v.answer = Answer::Yes;
      v.k = scan.maxLen;
      if (scan.haveWitness) v.witness = scan.witnessTrace;
    }
  } catch (const BudgetExceeded& e) {
    return budgetExceededVerdict(watch, v.stats, e);
  }
  v.stats.millis = watch.millis();
  return v;
}

// ---------------------------------------------------------------------------
// Benchmark generator

Cfm gen_benchmark(const std::vector<TextNfa>& automata, Gadget gadget) {
  if (automata.size() < 2) throw Error("the ring construction needs at least two automata");
  const std::size_t n = automata.size();
  Cfm cfm;
  cfm.name = "ring";
  for (std::size_t i = 0; i < n; ++i) cfm.addProcess("p" + std::to_string(i + 1));
  MessageId acceptMsg = cfm.internMessage("accept");

  std::vector<std::string> letters;
  for (const auto& a : automata)
    for (const auto& label : a.labels()) {
      if (label == "accept") throw Error("the letter 'accept' is reserved by the construction");
      if (std::find(letters.begin(), letters.end(), label) == letters.end())
        letters.push_back(label);
    }
  for (const auto& l : letters) cfm.internMessage(l);

  for (std::size_t i = 0; i < n; ++i) {
    ProcessId self = static_cast<ProcessId>(i);
    ProcessId next = static_cast<ProcessId>((i + 1) % n);
    ProcessId prev = static_cast<ProcessId>((i + n - 1) % n);
    const TextNfa& aut = automata[i];
    auto& proc = cfm.processes[self];
    for (const auto& name : aut.states) cfm.internState(self, "s_" + name);
    proc.initial = *cfm.stateByName(self, "s_" + aut.states.at(aut.initial));
    LocalState sink = cfm.internState(self, "accept");

    for (std::size_t t = 0; t < aut.transitions.size(); ++t) {
      const auto& tr = aut.transitions[t];
      MessageId m = *cfm.messageByName(tr.label);
      LocalState from = *cfm.stateByName(self, "s_" + aut.states[tr.from]);
      LocalState to = *cfm.stateByName(self, "s_" + aut.states[tr.to]);
      LocalState mid = cfm.internState(self, "t" + std::to_string(t));
      if (i == 0) {
        // The first process guesses the letter, sends it around the ring, and
        // waits for it to come back before the next guess.
        proc.transitions.push_back({from, send(self, next, m), mid});
        proc.transitions.push_back({mid, receive(self, prev, m), to});
      } else {
        proc.transitions.push_back({from, receive(self, prev, m), mid});
        proc.transitions.push_back({mid, send(self, next, m), to});
      }
    }
    for (std::uint32_t f : aut.finals) {
      LocalState fin = *cfm.stateByName(self, "s_" + aut.states[f]);
      if (i == 0) {
        proc.transitions.push_back({fin, send(self, next, acceptMsg), sink});
      } else if (i + 1 < n) {
        LocalState mid = cfm.internState(self, "t_acc" + std::to_string(f));
        proc.transitions.push_back({fin, receive(self, prev, acceptMsg), mid});
        proc.transitions.push_back({mid, send(self, next, acceptMsg), sink});
      } else {
        proc.transitions.push_back({fin, receive(self, prev, acceptMsg), sink});
      }
    }
  }

  if (gadget != Gadget::None) {
    ProcessId last = static_cast<ProcessId>(n - 1);
    ProcessId g1 = cfm.addProcess("g1");
    ProcessId g2 = cfm.addProcess("g2");
    LocalState lastSink = *cfm.stateByName(last, "accept");
    auto& lp = cfm.processes[last];
    auto& p1 = cfm.processes[g1];
    auto& p2 = cfm.processes[g2];
    if (gadget == Gadget::NonSync) {
      MessageId m1 = cfm.internMessage("gm1");
      MessageId m2 = cfm.internMessage("gm2");
      MessageId m3 = cfm.internMessage("gm3");
      MessageId m4 = cfm.internMessage("gm4");
      LocalState a1 = cfm.internState(last, "gs1");
      LocalState a2 = cfm.internState(last, "gs2");
      LocalState a3 = cfm.internState(last, "gs3");
      lp.transitions.push_back({lastSink, send(last, g1, m1), a1});
      lp.transitions.push_back({a1, receive(last, g1, m2), a2});
      lp.transitions.push_back({a2, send(last, g2, m3), a3});
      LocalState b0 = cfm.internState(g1, "u0");
      LocalState b1 = cfm.internState(g1, "u1");
      LocalState b2 = cfm.internState(g1, "u2");
      LocalState b3 = cfm.internState(g1, "u3");
      p1.initial = b0;
      p1.transitions.push_back({b0, send(g1, last, m2), b1});
      p1.transitions.push_back({b1, send(g1, g2, m4), b2});
      p1.transitions.push_back({b2, receive(g1, last, m1), b3});
      LocalState c0 = cfm.internState(g2, "v0");
      LocalState c1 = cfm.internState(g2, "v1");
      LocalState c2 = cfm.internState(g2, "v2");
      p2.initial = c0;
      p2.transitions.push_back({c0, receive(g2, last, m3), c1});
      p2.transitions.push_back({c1, receive(g2, g1, m4), c2});
    } else {
      MessageId d = cfm.internMessage("gd");
      LocalState a1 = cfm.internState(last, "gs1");
      LocalState a2 = cfm.internState(last, "gs2");
      LocalState a3 = cfm.internState(last, "gs3");
      lp.transitions.push_back({lastSink, send(last, g1, d), a1});
      lp.transitions.push_back({a1, receive(last, g1, d), a2});
      lp.transitions.push_back({a2, send(last, g2, d), a3});
      LocalState b0 = cfm.internState(g1, "u0");
      LocalState b1 = cfm.internState(g1, "u1");
      LocalState b2 = cfm.internState(g1, "u2");
      LocalState b3 = cfm.internState(g1, "u3");
      p1.initial = b0;
      p1.transitions.push_back({b0, send(g1, g2, d), b1});
      p1.transitions.push_back({b1, receive(g1, last, d), b2});
      p1.transitions.push_back({b2, send(g1, last, d), b3});
      LocalState c0 = cfm.internState(g2, "w0");
      LocalState c1 = cfm.internState(g2, "w1");
      p2.initial = c0;
      p2.transitions.push_back({c0, receive(g2, g1, d), c1});
    }
  }
  cfm.validate();
  return cfm;
}

}  // namespace mbx
