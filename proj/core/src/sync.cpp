// Round-schedulability search: the exact engine composes, on the fly, the
// per-round executability triple, the atomicity tracker, the ordered-chain
// bookkeeping for the minimal-witness shape, and complemented causality
// checkers that keep the appended receive reschedulable. The bounded engine
// enumerates concrete rounds and cross-checks with the partial-order tools.

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <set>

#include "mbx/decide.hpp"

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

// ---------------------------------------------------------------------------
// Exact engine

struct ChainState {
  std::uint8_t mode = 0;  // 0: no chain block yet, 1: chain open, 2: chain closed
  std::uint16_t prevActive = 0, prevMatched = 0;
  bool cond4Done = false;
  std::uint8_t armed = 0xff;  // process whose receive arms the send-after-receive pair
  friend auto operator<=>(const ChainState&, const ChainState&) = default;
  friend bool operator==(const ChainState&, const ChainState&) = default;
};

struct BlockState {
  std::uint32_t first = 0, second = 0, hat = 0;
  AtomicTracker tracker;
  bool isChain = false;
  std::uint16_t curActive = 0, curMatched = 0, curSenders = 0, curTargets = 0;
  bool containsS = false, hasUnmatchedToQ = false;
  friend auto operator<=>(const BlockState&, const BlockState&) = default;
  friend bool operator==(const BlockState&, const BlockState&) = default;
};

struct SearchState {
  std::uint8_t q = 0xff;  // receiver of the appended action
  bool inBlock = false;
  std::uint32_t boundary = 0;
  DeafSet deaf = 0;
  bool sSeen = false;
  std::uint8_t sp = 0xff;  // sender of the pending send matched by the appended receive
  std::uint16_t sm = 0;    // its message
  ChainState chain;
  BlockState block;  // meaningful only when inBlock
  std::vector<std::uint8_t> dcoPhase;  // 0 untagged, 1 first tagged, 2 done, 3 retired
  std::vector<std::uint64_t> dcoSub;   // causality-checker subsets per copy
  friend auto operator<=>(const SearchState&, const SearchState&) = default;
  friend bool operator==(const SearchState&, const SearchState&) = default;
};

class ExactSyncSearch {
 public:
  explicit ExactSyncSearch(const Cfm& cfm)
      : cfm_(cfm), table_(cfm), P_(cfm.processCount()), tables_{cfm.processCount()} {}

  Verdict run(const SyncOptions& options) {
    Stopwatch watch;
    Verdict v;
    Budget budget(options.budget);
    try {
      auto witness = search(budget, v.stats);
      if (witness) {
        v.answer = Answer::No;
        v.witness = std::move(*witness);
        v.detail = "mailbox trace with no round rescheduling";
      } else {
        v.answer = Answer::Yes;
      }
    } catch (const BudgetExceeded& e) {
      v.answer = Answer::BudgetExceeded;
      v.detail = e.what();
    }
    v.stats.millis = watch.millis();
    return v;
  }

 private:
  struct Crumb {
    std::int64_t parent;
    std::int8_t kind;  // 0 open/none, 1 send, 2 close
    Action action;
    bool annotated = false;
  };

  std::uint32_t intern(const SearchState& s, std::int64_t parent, std::int8_t kind,
                       const Action& a, bool annotated, bool* fresh) {
    auto it = index_.find(s);
    if (it != index_.end()) {
      *fresh = false;
      return it->second;
    }
    std::uint32_t id = static_cast<std::uint32_t>(states_.size());
    states_.push_back(s);
    crumbs_.push_back(Crumb{parent, kind, a, annotated});
    index_.emplace(s, id);
    *fresh = true;
    return id;
  }

  // Witness trace: the guessed rounds, each normalized to sends then
  // receives, the appended receive, and finally a mailbox-consistent
  // rescheduling of the whole chart.
  Trace decode(std::int64_t id) {
    std::vector<Crumb> rev;
    for (std::int64_t cur = id; cur >= 0; cur = crumbs_[cur].parent) rev.push_back(crumbs_[cur]);
    std::reverse(rev.begin(), rev.end());
    Trace v;
    std::vector<Crumb> block;
    for (const Crumb& c : rev) {
      if (c.kind == 1) block.push_back(c);
      if (c.kind == 2) {
        for (const Crumb& s : block) v.push_back(s.action);
        for (const Crumb& s : block)
          if (!s.annotated) v.push_back(receive(s.action.peer, s.action.actor, s.action.message));
        block.clear();
      }
    }
    const SearchState& fin = states_[static_cast<std::size_t>(id)];
    v.push_back(receive(fin.q, fin.sp, fin.sm));
    Msc chart = msc_of(v);
    auto lin = some_linearization(chart, ProcessNetwork::mailbox(P_));
    if (!lin) throw Error("internal: witness chart admits no mailbox linearization");
    return *lin;
  }

  bool accepting(const SearchState& s) {
    if (s.inBlock || s.chain.mode != 2 || !s.sSeen) return false;
    if (!table_.hasReceiveTransition(s.boundary, receive(s.q, s.sp, s.sm))) return false;
    for (ProcessId c = 0; c < P_; ++c) {
      if (c == s.q || s.dcoPhase[c] == 3) continue;
      if (tables_.hasDone(s.dcoSub[c])) return false;
    }
    return true;
  }

  void stepCopies(SearchState& s, const Action& a, bool annotated, bool designating) const {
    for (ProcessId c = 0; c < P_; ++c) {
      if (c == s.q || s.dcoPhase[c] == 3) continue;
      bool bullet = false;
      if (designating) {
        if (c == a.actor) {
          s.dcoPhase[c] = 3;
          s.dcoSub[c] = 0;
          continue;
        }
        bullet = true;
        s.dcoPhase[c] = 2;
      } else if (annotated && a.peer == s.q && c == a.actor && s.dcoPhase[c] == 0) {
        if (!s.sSeen) {
          bullet = true;
          s.dcoPhase[c] = 1;
        } else {
          s.dcoPhase[c] = 2;
        }
      }
      s.dcoSub[c] = tables_.stepSend(s.dcoSub[c], a, annotated, bullet);
    }
  }

  std::vector<ChainState> chainCloses(const ChainState& ch, const BlockState& b,
                                      std::uint8_t q) const {
    std::vector<ChainState> out;
    if (!b.isChain) {
      out.push_back(ch);
      return out;
    }
    if (ch.mode == 2) return out;
    if (ch.mode == 0) {
      // The first chain block must anchor at the pending send.
      if (!(b.containsS || b.hasUnmatchedToQ)) return out;
    } else {
      bool arc = (ch.prevActive & b.curActive) != 0 || (ch.prevMatched & b.curTargets) != 0;
      if (!arc) return out;
    }
    bool done = ch.cond4Done || (ch.armed != 0xff && ((b.curSenders >> ch.armed) & 1));
    bool qActs = (b.curActive >> q) & 1;
    if (done && (b.containsS || qActs)) {
      ChainState closed;
      closed.mode = 2;
      closed.cond4Done = true;
      out.push_back(closed);
    }
    ChainState open;
    open.mode = 1;
    open.prevActive = b.curActive;
    open.prevMatched = b.curMatched;
    open.cond4Done = done;
    open.armed = 0xff;
    out.push_back(open);
    if (!done) {
      for (ProcessId p = 0; p < P_; ++p) {
        if (!((b.curMatched >> p) & 1)) continue;
        ChainState armed = open;
        armed.armed = static_cast<std::uint8_t>(p);
        out.push_back(armed);
      }
    }
    return out;
  }

  std::optional<Trace> search(Budget& budget, DecisionStats& stats) {
    std::deque<std::uint32_t> frontier;
    auto push = [&](const SearchState& s, std::int64_t parent, std::int8_t kind, const Action& a,
                    bool annotated, bool cheap) {
      bool fresh = false;
      std::uint32_t id = intern(s, parent, kind, a, annotated, &fresh);
      if (!fresh) return;
      budget.charge();
      if (cheap)
        frontier.push_front(id);
      else
        frontier.push_back(id);
    };

    std::uint32_t init = table_.initial();
    for (ProcessId q = 0; q < P_; ++q) {
      bool receivesSomething = false;
      for (const auto& t : cfm_.processes[q].transitions)
        receivesSomething = receivesSomething || t.action.isReceive();
      if (!receivesSomething) continue;
      SearchState s;
      s.q = static_cast<std::uint8_t>(q);
      s.boundary = init;
      s.dcoPhase.assign(P_, 0);
      s.dcoPhase[q] = 3;
      s.dcoSub.assign(P_, std::uint64_t(1) << CausalityTables::kStart);
      s.dcoSub[q] = 0;
      bool fresh = false;
      std::uint32_t id = intern(s, -1, 0, Action{}, false, &fresh);
      if (fresh) frontier.push_back(id);
    }

    while (!frontier.empty()) {
      std::uint32_t id = frontier.front();
      frontier.pop_front();
      SearchState s = states_[id];
      stats.statesExplored++;
      if (accepting(s)) return decode(id);

      if (!s.inBlock) {
        for (std::uint32_t hat : table_.sendReachable(s.boundary)) {
          for (bool isChain : {false, true}) {
            if (isChain && s.chain.mode == 2) continue;
            SearchState next = s;
            next.inBlock = true;
            next.block = BlockState{};
            next.block.first = s.boundary;
            next.block.second = hat;
            next.block.hat = hat;
            next.block.tracker = AtomicTracker::fresh(P_);
            next.block.isChain = isChain;
            push(next, id, 0, Action{}, false, true);
          }
        }
        continue;
      }

      // Close the round once executability met the guessed middle state and
      // the atomicity certificate is complete.
      if (s.block.first == s.block.hat && s.block.tracker.accepting()) {
        for (const ChainState& ch : chainCloses(s.chain, s.block, s.q)) {
          SearchState next = s;
          next.inBlock = false;
          next.boundary = s.block.second;
          next.chain = ch;
          next.block = BlockState{};
          for (ProcessId c = 0; c < P_; ++c) {
            if (c == s.q || next.dcoPhase[c] == 3) continue;
            next.dcoSub[c] = tables_.stepDivider(next.dcoSub[c]);
          }
          push(next, id, 2, Action{}, false, true);
        }
      }

      // Extend the round by one send, annotated or plain.
      const auto locals = table_.locals(s.block.first);
      std::vector<Action> candidates;
      for (ProcessId p = 0; p < P_; ++p)
        for (const auto& t : cfm_.processes[p].transitions)
          if (t.from == locals[p] && t.action.isSend()) candidates.push_back(t.action);
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

      for (const Action& a : candidates) {
        std::vector<std::uint32_t> firsts = table_.sendSuccessors(s.block.first, a);
        for (bool annotated : {false, true}) {
          std::vector<std::uint32_t> seconds;
          if (!annotated) {
            if (deafContains(s.deaf, a.peer)) continue;
            seconds =
                table_.receiveSuccessors(s.block.second, receive(a.peer, a.actor, a.message));
            if (seconds.empty()) continue;
          }
          auto trackers = s.block.tracker.step(a, annotated);
          bool canDesignate = annotated && a.peer == s.q && !s.sSeen && s.dcoPhase[a.actor] == 0;
          for (bool designating : {false, true}) {
            if (designating && !canDesignate) continue;
            SearchState base = s;
            if (annotated) base.deaf = deafAdd(base.deaf, a.peer);
            if (designating) {
              base.sSeen = true;
              base.sp = static_cast<std::uint8_t>(a.actor);
              base.sm = a.message;
            }
            stepCopies(base, a, annotated, designating);
            if (base.block.isChain) {
              base.block.curActive |= std::uint16_t(1) << a.actor;
              base.block.curSenders |= std::uint16_t(1) << a.actor;
              base.block.curTargets |= std::uint16_t(1) << a.peer;
              if (!annotated) {
                base.block.curActive |= std::uint16_t(1) << a.peer;
                base.block.curMatched |= std::uint16_t(1) << a.peer;
              }
            }
            if (designating) base.block.containsS = true;
            if (annotated && a.peer == s.q) base.block.hasUnmatchedToQ = true;
            for (std::uint32_t f : firsts) {
              if (annotated) {
                for (const auto& tr : trackers) {
                  SearchState next = base;
                  next.block.first = f;
                  next.block.tracker = tr;
                  push(next, id, 1, a, true, false);
                }
              } else {
                for (std::uint32_t r : seconds) {
                  for (const auto& tr : trackers) {
                    SearchState next = base;
                    next.block.first = f;
                    next.block.second = r;
                    next.block.tracker = tr;
                    push(next, id, 1, a, false, false);
                  }
                }
              }
            }
          }
        }
      }
    }
    return std::nullopt;
  }

  const Cfm& cfm_;
  GlobalStateTable table_;
  std::size_t P_;
  CausalityTables tables_;
  std::vector<SearchState> states_;
  std::vector<Crumb> crumbs_;
  std::map<SearchState, std::uint32_t> index_;
};

// ---------------------------------------------------------------------------
// Bounded engine: concrete rounds, partial-order checks per appended receive.

class BoundedSyncSearch {
 public:
  BoundedSyncSearch(const Cfm& cfm, const SyncOptions& options)
      : cfm_(cfm), options_(options), net_(ProcessNetwork::mailbox(cfm.processCount())) {}

  Verdict run() {
    Stopwatch watch;
    Verdict v;
    try {
      Budget budget(options_.budget);
      Trace prefix;
      Configuration conf = initial_configuration(cfm_, net_);
      explore(conf, prefix, 0, 0, budget, v.stats);
      v.answer = Answer::Yes;
      v.detail = "no violation within the exploration bounds";
    } catch (const Found& f) {
      v.answer = Answer::No;
      v.witness = f.witness;
      v.detail = "mailbox trace with no round rescheduling";
    } catch (const BudgetExceeded& e) {
      v.answer = Answer::BudgetExceeded;
      v.detail = e.what();
    }
    v.stats.millis = watch.millis();
    return v;
  }

 private:
  struct Found {
    Trace witness;
  };

  // A trace is round-schedulable iff no atomic factor makes a process send
  // after receiving.
  bool roundSchedulable(const Trace& t) const {
    for (const auto& factor : decompose(t, net_)) {
      std::vector<bool> received(cfm_.processCount(), false);
      for (const Action& a : factor.factor) {
        if (a.isReceive())
          received[a.actor] = true;
        else if (received[a.actor])
          return false;
      }
    }
    return true;
  }

  void checkReceives(const Configuration& conf, const Trace& prefix, DecisionStats& stats) {
    for (ProcessId q = 0; q < cfm_.processCount(); ++q) {
      for (const auto& t : cfm_.processes[q].transitions) {
        if (t.from != conf.locals[q] || !t.action.isReceive()) continue;
        const Action& r = t.action;
        Trace ur = prefix;
        ur.push_back(r);
        if (!is_viable(ProcessNetwork::p2p(cfm_.processCount()), ur)) continue;
        stats.statesExplored++;
        Msc chart = msc_of(ur);
        if (!is_valid(chart, net_)) continue;  // no mailbox rescheduling of u.r exists
        auto lin = some_linearization(chart, net_);
        if (!lin) continue;
        if (!roundSchedulable(*lin)) throw Found{*lin};
      }
    }
  }

  void explore(const Configuration& conf, Trace& prefix, DeafSet deaf, std::size_t sendsSoFar,
               Budget& budget, DecisionStats& stats) {
    budget.charge();
    stats.statesExplored++;
    checkReceives(conf, prefix, stats);
    if (sendsSoFar >= options_.maxTotalSends) return;
    std::vector<Action> matched;
    extendRound(conf, prefix, deaf, 0, matched, 0, sendsSoFar, budget, stats);
  }

  // Depth-first over the sends of one round; plain sends are received within
  // the round, in send order, before recursing into the next round.
  void extendRound(const Configuration& conf, Trace& prefix, DeafSet deaf, DeafSet roundDeaf,
                   std::vector<Action>& matched, std::size_t sends, std::size_t sendsSoFar,
                   Budget& budget, DecisionStats& stats) {
    budget.charge();
    if (sends > 0) {
      Configuration after = conf;
      std::size_t base = prefix.size();
      bool ok = true;
      for (const Action& ms : matched) {
        Action r = receive(ms.peer, ms.actor, ms.message);
        auto next = step(cfm_, net_, after, r);
        if (!next) {
          ok = false;
          break;
        }
        after = std::move(*next);
        prefix.push_back(r);
      }
      if (ok) explore(after, prefix, deaf | roundDeaf, sendsSoFar + sends, budget, stats);
      prefix.resize(base);
    }
    if (sends >= options_.maxExchangeSends || sendsSoFar + sends >= options_.maxTotalSends) return;

    for (ProcessId p = 0; p < cfm_.processCount(); ++p) {
      for (const auto& t : cfm_.processes[p].transitions) {
        if (t.from != conf.locals[p] || !t.action.isSend()) continue;
        const Action& a = t.action;
        auto next = step(cfm_, net_, conf, a);
        if (!next) continue;
        // Annotated: the target goes deaf for the rest of the run.
        prefix.push_back(a);
        extendRound(*next, prefix, deaf, deafAdd(roundDeaf, a.peer), matched, sends + 1,
                    sendsSoFar, budget, stats);
        prefix.pop_back();
        // Plain: the target must still be able to receive.
        if (!deafContains(deaf | roundDeaf, a.peer)) {
          matched.push_back(a);
          prefix.push_back(a);
          extendRound(*next, prefix, deaf, roundDeaf, matched, sends + 1, sendsSoFar, budget,
                      stats);
          prefix.pop_back();
          matched.pop_back();
        }
      }
    }
  }

  const Cfm& cfm_;
  SyncOptions options_;
  ProcessNetwork net_;
};

}  // namespace

Verdict check_sync(const Cfm& cfm, const SyncOptions& options) {
  if (options.engine == SyncEngine::Exact) {
    ExactSyncSearch search(cfm);
    return search.run(options);
  }
  BoundedSyncSearch search(cfm, options);
  return search.run();
}

}  // namespace mbx
