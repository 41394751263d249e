#include "mbx/machines.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <set>

namespace mbx {

// ---------------------------------------------------------------------------
// GlobalStateTable

GlobalStateTable::GlobalStateTable(const Cfm& cfm) : cfm_(cfm) {
  if (cfm.processCount() > 32) throw Error("at most 32 processes are supported");
}

std::uint32_t GlobalStateTable::intern(const std::vector<LocalState>& locals) {
  auto it = index_.find(locals);
  if (it != index_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(states_.size());
  states_.push_back(locals);
  index_.emplace(locals, id);
  return id;
}

std::uint32_t GlobalStateTable::initial() {
  std::vector<LocalState> locals;
  locals.reserve(cfm_.processCount());
  for (const auto& p : cfm_.processes) locals.push_back(p.initial);
  return intern(locals);
}

std::vector<std::uint32_t> GlobalStateTable::sendSuccessors(std::uint32_t g, const Action& send) {
  std::vector<std::uint32_t> out;
  const auto& locals = states_.at(g);
  for (const auto& t : cfm_.processes.at(send.actor).transitions) {
    if (t.from != locals[send.actor] || t.action != send) continue;
    auto next = locals;
    next[send.actor] = t.to;
    out.push_back(intern(next));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint32_t> GlobalStateTable::receiveSuccessors(std::uint32_t g,
                                                               const Action& recv) {
  std::vector<std::uint32_t> out;
  const auto& locals = states_.at(g);
  for (const auto& t : cfm_.processes.at(recv.actor).transitions) {
    if (t.from != locals[recv.actor] || t.action != recv) continue;
    auto next = locals;
    next[recv.actor] = t.to;
    out.push_back(intern(next));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool GlobalStateTable::hasReceiveTransition(std::uint32_t g, const Action& recv) {
  const auto& locals = states_.at(g);
  for (const auto& t : cfm_.processes.at(recv.actor).transitions)
    if (t.from == locals[recv.actor] && t.action == recv) return true;
  return false;
}

const std::vector<LocalState>& GlobalStateTable::localSendReach(ProcessId p, LocalState s) {
  auto key = std::make_pair(p, s);
  auto it = sendReachCache_.find(key);
  if (it != sendReachCache_.end()) return it->second;
  std::set<LocalState> seen{s};
  std::deque<LocalState> todo{s};
  while (!todo.empty()) {
    LocalState cur = todo.front();
    todo.pop_front();
    for (const auto& t : cfm_.processes.at(p).transitions)
      if (t.from == cur && t.action.isSend() && seen.insert(t.to).second) todo.push_back(t.to);
  }
  auto [ins, _] = sendReachCache_.emplace(key, std::vector<LocalState>(seen.begin(), seen.end()));
  return ins->second;
}

std::vector<std::uint32_t> GlobalStateTable::sendReachable(std::uint32_t g) {
  const auto locals = states_.at(g);
  std::vector<const std::vector<LocalState>*> axes;
  std::size_t total = 1;
  for (ProcessId p = 0; p < cfm_.processCount(); ++p) {
    axes.push_back(&localSendReach(p, locals[p]));
    total *= axes.back()->size();
    if (total > 1'000'000) throw BudgetExceeded(1'000'000);
  }
  std::vector<std::uint32_t> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  std::vector<LocalState> tuple(axes.size());
  while (true) {
    for (std::size_t p = 0; p < axes.size(); ++p) tuple[p] = (*axes[p])[idx[p]];
    out.push_back(intern(tuple));
    std::size_t p = 0;
    for (; p < axes.size(); ++p) {
      if (++idx[p] < axes[p]->size()) break;
      idx[p] = 0;
    }
    if (p == axes.size()) break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Alphabets

std::vector<Letter> system_alphabet(const Cfm& cfm, bool withBarred, bool withReceives) {
  std::vector<Letter> out;
  const std::size_t n = cfm.processCount();
  for (ProcessId a = 0; a < n; ++a)
    for (ProcessId b = 0; b < n; ++b) {
      if (a == b) continue;
      for (MessageId m = 0; m < cfm.messageCount(); ++m) {
        out.push_back(sendLetter(send(a, b, m)));
        if (withBarred) out.push_back(barredLetter(send(a, b, m)));
        if (withReceives) out.push_back(receiveLetter(receive(b, a, m)));
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Asynchronous product with annotated send copies

SystemNfa::SystemNfa(const Cfm& cfm)
    : cfm_(cfm), table_(cfm), alphabet_(system_alphabet(cfm, true, true)) {}

void SystemNfa::expand(std::uint32_t state,
                       const std::function<void(const Letter&, std::uint32_t)>& sink) {
  const auto locals = table_.locals(state);
  for (ProcessId p = 0; p < cfm_.processCount(); ++p) {
    for (const auto& t : cfm_.processes[p].transitions) {
      if (t.from != locals[p]) continue;
      auto next = locals;
      next[p] = t.to;
      std::uint32_t id = table_.intern(next);
      if (t.action.isSend()) {
        sink(sendLetter(t.action), id);
        sink(barredLetter(t.action), id);
      } else {
        sink(receiveLetter(t.action), id);
      }
    }
  }
}

std::string SystemNfa::describe(std::uint32_t state) {
  const auto& locals = table_.locals(state);
  std::string out = "(";
  for (std::size_t p = 0; p < locals.size(); ++p) {
    if (p) out += ",";
    out += cfm_.processes[p].stateNames.at(locals[p]);
  }
  return out + ")";
}

std::unique_ptr<Nfa> async_product(const Cfm& cfm) { return std::make_unique<SystemNfa>(cfm); }

// ---------------------------------------------------------------------------
// Exchange lifting

namespace {

/// Reads send projections of round-structured sequences by simulating, per
/// round, a send walk and the synchronized receive walk from a guessed
/// mid-round state.
class SyncLiftNfa : public Nfa {
 public:
  SyncLiftNfa(std::shared_ptr<Nfa> inner, SyncLiftOptions options)
      : inner_(std::move(inner)), options_(std::move(options)) {
    for (const Letter& l : inner_->alphabet())
      if (l.isSendLike()) alphabet_.push_back(l);
    if (options_.validateRDiamond) {
      Budget budget(1'000'000);
      std::string offender;
      if (!check_r_diamond(*inner_, budget, &offender))
        throw Error("sync_lift requires a receive-diamond automaton: " + offender);
    }
  }

  const std::vector<Letter>& alphabet() const override { return alphabet_; }

  std::vector<std::uint32_t> initials() override {
    std::vector<std::uint32_t> out;
    for (auto [state, deaf] : options_.starts) out.push_back(internBoundary(state, deaf));
    return out;
  }

  bool accepting(std::uint32_t id) override {
    const State& s = states_.at(id);
    return s.phase == Phase::Boundary && options_.finals(s.first, s.deaf);
  }

  void expand(std::uint32_t id,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override {
    State s = states_.at(id);
    if (s.phase == Phase::Boundary) return;
    for (const Letter& l : alphabet_) {
      const Action& a = l.action;
      if (l.kind == LetterKind::Send) {
        if (deafContains(s.deaf, a.peer)) continue;
        Action recv = receive(a.peer, a.actor, a.message);
        auto firsts = inner_->successors(s.first, l);
        if (firsts.empty()) continue;
        auto seconds = inner_->successors(s.second, receiveLetter(recv));
        for (std::uint32_t f : firsts)
          for (std::uint32_t r : seconds) sink(l, internMiddle(f, r, s.hat, s.deaf));
      } else {
        for (std::uint32_t f : inner_->successors(s.first, l))
          sink(l, internMiddle(f, s.second, s.hat, deafAdd(s.deaf, a.peer)));
      }
    }
  }

  void expandEpsilon(std::uint32_t id, const std::function<void(std::uint32_t)>& sink) override {
    State s = states_.at(id);
    if (s.phase == Phase::Boundary) {
      for (std::uint32_t hat : sendReach(s.first)) sink(internMiddle(s.first, hat, hat, s.deaf));
    } else if (s.first == s.hat) {
      sink(internBoundary(s.second, s.deaf));
    }
  }

  std::string describe(std::uint32_t id) override {
    const State& s = states_.at(id);
    if (s.phase == Phase::Boundary)
      return "[" + inner_->describe(s.first) + " D=" + std::to_string(s.deaf) + "]";
    return "(" + inner_->describe(s.first) + "," + inner_->describe(s.second) + "," +
           inner_->describe(s.hat) + " D=" + std::to_string(s.deaf) + ")";
  }

  std::size_t statesInterned() const override { return states_.size() + inner_->statesInterned(); }

 private:
  enum class Phase : std::uint8_t { Boundary, Middle };
  struct State {
    Phase phase;
    std::uint32_t first, second, hat;
    DeafSet deaf;
    friend auto operator<=>(const State&, const State&) = default;
  };

  std::uint32_t internState(const State& s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(states_.size());
    states_.push_back(s);
    index_.emplace(s, id);
    return id;
  }
  std::uint32_t internBoundary(std::uint32_t b, DeafSet d) {
    return internState(State{Phase::Boundary, b, 0, 0, d});
  }
  std::uint32_t internMiddle(std::uint32_t f, std::uint32_t s, std::uint32_t h, DeafSet d) {
    return internState(State{Phase::Middle, f, s, h, d});
  }

  // Mid-round states must be reached by the send walk, so only send-reachable
  // inner states are viable guesses.
  const std::vector<std::uint32_t>& sendReach(std::uint32_t from) {
    auto it = reachCache_.find(from);
    if (it != reachCache_.end()) return it->second;
    std::set<std::uint32_t> seen{from};
    std::deque<std::uint32_t> todo{from};
    std::uint64_t guard = 0;
    while (!todo.empty()) {
      std::uint32_t cur = todo.front();
      todo.pop_front();
      if (++guard > 1'000'000) throw BudgetExceeded(1'000'000);
      inner_->expand(cur, [&](const Letter& l, std::uint32_t next) {
        if (l.isSendLike() && seen.insert(next).second) todo.push_back(next);
      });
    }
    auto [ins, _] = reachCache_.emplace(from, std::vector<std::uint32_t>(seen.begin(), seen.end()));
    return ins->second;
  }

  std::shared_ptr<Nfa> inner_;
  SyncLiftOptions options_;
  std::vector<Letter> alphabet_;
  std::vector<State> states_;
  std::map<State, std::uint32_t> index_;
  std::map<std::uint32_t, std::vector<std::uint32_t>> reachCache_;
};

/// Single-exchange recognizer between two fixed (state, deaf set) pairs.
class ExchangeNfa : public Nfa {
 public:
  ExchangeNfa(std::shared_ptr<Nfa> inner, std::uint32_t from, DeafSet d, std::uint32_t to,
              DeafSet dPrime)
      : inner_(std::move(inner)), from_(from), d_(d), to_(to), dPrime_(dPrime) {
    for (const Letter& l : inner_->alphabet())
      if (l.isSendLike()) alphabet_.push_back(l);
  }

  const std::vector<Letter>& alphabet() const override { return alphabet_; }
  std::vector<std::uint32_t> initials() override { return {kStart}; }
  bool accepting(std::uint32_t id) override { return id == kEnd; }

  void expand(std::uint32_t id,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override {
    if (id < kFirstMiddle) return;
    Middle m = middles_.at(id - kFirstMiddle);
    for (const Letter& l : alphabet_) {
      const Action& a = l.action;
      if (l.kind == LetterKind::Send) {
        if (deafContains(m.deaf, a.peer)) continue;
        auto firsts = inner_->successors(m.first, l);
        if (firsts.empty()) continue;
        auto seconds = inner_->successors(m.second, receiveLetter(receive(a.peer, a.actor, a.message)));
        for (std::uint32_t f : firsts)
          for (std::uint32_t r : seconds) sink(l, intern(Middle{f, r, m.hat, m.deaf}));
      } else {
        for (std::uint32_t f : inner_->successors(m.first, l))
          sink(l, intern(Middle{f, m.second, m.hat, deafAdd(m.deaf, a.peer)}));
      }
    }
  }

  void expandEpsilon(std::uint32_t id, const std::function<void(std::uint32_t)>& sink) override {
    if (id == kStart) {
      for (std::uint32_t hat : sendReach()) sink(intern(Middle{from_, hat, hat, d_}));
    } else if (id >= kFirstMiddle) {
      const Middle& m = middles_.at(id - kFirstMiddle);
      if (m.first == m.hat && m.second == to_ && m.deaf == dPrime_) sink(kEnd);
    }
  }

  std::string describe(std::uint32_t id) override {
    if (id == kStart) return "start";
    if (id == kEnd) return "end";
    const Middle& m = middles_.at(id - kFirstMiddle);
    return "(" + inner_->describe(m.first) + "," + inner_->describe(m.second) + "," +
           inner_->describe(m.hat) + " D=" + std::to_string(m.deaf) + ")";
  }

  std::size_t statesInterned() const override { return middles_.size() + 2; }

 private:
  struct Middle {
    std::uint32_t first, second, hat;
    DeafSet deaf;
    friend auto operator<=>(const Middle&, const Middle&) = default;
  };
  static constexpr std::uint32_t kStart = 0, kEnd = 1, kFirstMiddle = 2;

  std::uint32_t intern(const Middle& m) {
    auto it = index_.find(m);
    if (it != index_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(middles_.size()) + kFirstMiddle;
    middles_.push_back(m);
    index_.emplace(m, id);
    return id;
  }

  const std::vector<std::uint32_t>& sendReach() {
    if (!reach_.empty() || computed_) return reach_;
    computed_ = true;
    std::set<std::uint32_t> seen{from_};
    std::deque<std::uint32_t> todo{from_};
    while (!todo.empty()) {
      std::uint32_t cur = todo.front();
      todo.pop_front();
      inner_->expand(cur, [&](const Letter& l, std::uint32_t next) {
        if (l.isSendLike() && seen.insert(next).second) todo.push_back(next);
      });
    }
    reach_.assign(seen.begin(), seen.end());
    return reach_;
  }

  std::shared_ptr<Nfa> inner_;
  std::uint32_t from_;
  DeafSet d_;
  std::uint32_t to_;
  DeafSet dPrime_;
  std::vector<Letter> alphabet_;
  std::vector<Middle> middles_;
  std::map<Middle, std::uint32_t> index_;
  std::vector<std::uint32_t> reach_;
  bool computed_ = false;
};

}  // namespace

std::unique_ptr<Nfa> sync_lift(std::shared_ptr<Nfa> inner, SyncLiftOptions options) {
  return std::make_unique<SyncLiftNfa>(std::move(inner), std::move(options));
}

ExchangePair exchange_automata(const Cfm& cfm, const std::vector<LocalState>& from, DeafSet d,
                               const std::vector<LocalState>& to, DeafSet dPrime) {
  auto mkInner = [&]() {
    auto inner = std::make_shared<SystemNfa>(cfm);
    std::uint32_t fromId = inner->table().intern(from);
    std::uint32_t toId = inner->table().intern(to);
    return std::make_tuple(std::static_pointer_cast<Nfa>(inner), fromId, toId);
  };
  ExchangePair out;
  {
    auto [inner, fromId, toId] = mkInner();
    out.single = std::make_unique<ExchangeNfa>(inner, fromId, d, toId, dPrime);
  }
  {
    auto [inner, fromId, toId] = mkInner();
    SyncLiftOptions options;
    options.starts = {{fromId, d}};
    options.finals = [toId, dPrime](std::uint32_t b, DeafSet dd) {
      return b == toId && dd == dPrime;
    };
    options.validateRDiamond = false;  // products of per-process machines commute receives
    out.rounds = sync_lift(inner, std::move(options));
  }
  return out;
}

std::unique_ptr<Nfa> sync_of_property(std::shared_ptr<Nfa> property) {
  {
    Budget budget(1'000'000);
    for (std::uint32_t s : reachable_states(*property, budget)) {
      bool hasEps = false;
      property->expandEpsilon(s, [&](std::uint32_t) { hasEps = true; });
      if (hasEps) throw Error("sync_of_property expects an epsilon-free automaton");
    }
  }
  SyncLiftOptions options;
  for (std::uint32_t s : property->initials()) options.starts.emplace_back(s, DeafSet{0});
  auto propertyRaw = property;
  options.finals = [propertyRaw](std::uint32_t b, DeafSet) { return propertyRaw->accepting(b); };
  options.validateRDiamond = true;
  return sync_lift(std::move(property), std::move(options));
}

// ---------------------------------------------------------------------------
// Causality tables and machines

namespace {

std::uint64_t openModes(const CausalityTables& t, const Action& send, bool annotated) {
  std::uint64_t out = std::uint64_t(1) << t.orderState(send.actor);
  if (!annotated) {
    out |= std::uint64_t(1) << t.mailboxState(send.peer);
    out |= std::uint64_t(1) << t.msgSendState(send.peer);
  }
  return out;
}

}  // namespace

std::uint64_t CausalityTables::stepSend(std::uint64_t subset, const Action& send, bool annotated,
                                        bool bullet) const {
  std::uint64_t next = 0;
  std::uint64_t open = openModes(*this, send, annotated);
  if ((subset >> kStart) & 1) next |= bullet ? open : (std::uint64_t(1) << kStart);
  if ((subset >> kDone) & 1) {
    if (!bullet) next |= std::uint64_t(1) << kDone;
  }
  for (ProcessId p = 0; p < processCount; ++p) {
    if ((subset >> orderState(p)) & 1) {
      bool hop = send.actor == p;
      if (bullet) {
        if (hop) next |= std::uint64_t(1) << kDone;
      } else {
        next |= std::uint64_t(1) << orderState(p);
        if (hop) next |= open;
      }
    }
    if ((subset >> mailboxState(p)) & 1) {
      bool hop = send.peer == p;
      if (bullet) {
        if (hop) next |= std::uint64_t(1) << kDone;
      } else {
        next |= std::uint64_t(1) << mailboxState(p);
        if (hop) next |= open;
      }
    }
    if ((subset >> msgSendState(p)) & 1) {
      if (!bullet) next |= std::uint64_t(1) << msgSendState(p);
    }
    if ((subset >> msgRecvState(p)) & 1) {
      bool hop = send.actor == p;
      if (bullet) {
        if (hop) next |= std::uint64_t(1) << kDone;
      } else {
        next |= std::uint64_t(1) << msgRecvState(p);
        if (hop) next |= open;
      }
    }
  }
  return next;
}

std::uint64_t CausalityTables::stepReceive(std::uint64_t subset) const {
  std::uint64_t next = subset;
  for (ProcessId p = 0; p < processCount; ++p) {
    std::uint64_t sendBit = std::uint64_t(1) << msgSendState(p);
    if (subset & sendBit) {
      next &= ~sendBit;
      next |= std::uint64_t(1) << msgRecvState(p);
    }
  }
  return next;
}

std::uint64_t CausalityTables::stepDivider(std::uint64_t subset) const { return stepReceive(subset); }

namespace {

// Explicit automaton for the causality checker over a tagged alphabet.
std::unique_ptr<Nfa> buildCausality(const Cfm& cfm, bool hashed) {
  CausalityTables tables{cfm.processCount()};
  auto out = std::make_unique<ExplicitNfa>();
  for (ProcessId a = 0; a < cfm.processCount(); ++a)
    for (ProcessId b = 0; b < cfm.processCount(); ++b) {
      if (a == b) continue;
      for (MessageId m = 0; m < cfm.messageCount(); ++m) {
        for (Tag tag : {Tag::Circle, Tag::Bullet}) {
          out->letters.push_back(Letter{LetterKind::Send, tag, send(a, b, m)});
          out->letters.push_back(Letter{LetterKind::BarredSend, tag, send(a, b, m)});
          if (!hashed) out->letters.push_back(Letter{LetterKind::Receive, tag, receive(b, a, m)});
        }
      }
    }
  if (hashed) out->letters.push_back(divider());

  for (std::size_t s = 0; s < tables.stateCount(); ++s) {
    std::string name;
    if (s == CausalityTables::kStart)
      name = "start";
    else if (s == CausalityTables::kDone)
      name = "done";
    else {
      ProcessId p = static_cast<ProcessId>((s - 2) / 4);
      const char* kinds[] = {"ord", "mbx", "msgS", "msgR"};
      name = std::string(kinds[(s - 2) % 4]) + ":" + cfm.processes[p].name;
    }
    out->addState(s == CausalityTables::kDone, name);
  }
  out->initialStates = {CausalityTables::kStart};

  for (std::size_t s = 0; s < tables.stateCount(); ++s) {
    std::uint64_t bit = std::uint64_t(1) << s;
    for (const Letter& l : out->letters) {
      std::uint64_t next = 0;
      if (l.kind == LetterKind::Divider)
        next = tables.stepDivider(bit);
      else if (l.kind == LetterKind::Receive)
        next = l.tag == Tag::Bullet ? 0 : tables.stepReceive(bit);
      else
        next = tables.stepSend(bit, l.action, l.kind == LetterKind::BarredSend,
                               l.tag == Tag::Bullet);
      for (std::size_t t = 0; t < tables.stateCount(); ++t)
        if ((next >> t) & 1) out->addTransition(static_cast<std::uint32_t>(s), l,
                                                static_cast<std::uint32_t>(t));
    }
  }
  return out;
}

}  // namespace

std::unique_ptr<Nfa> causality_nfa(const Cfm& cfm) { return buildCausality(cfm, false); }

std::unique_ptr<Nfa> causality_nfa_hashed(const Cfm& cfm) { return buildCausality(cfm, true); }

std::unique_ptr<Nfa> similarity_nfa(const Cfm& cfm, const Action& r) {
  if (!r.isReceive()) throw Error("similarity_nfa expects a receive action");
  const ProcessId q = r.actor;
  const ProcessId p = r.peer;
  CausalityTables tables{cfm.processCount()};
  const std::size_t dStates = tables.stateCount();

  // Window component: 0 = before the first tagged send, 1 = between the tags,
  // 2 = past the second. An untagged never-received send p->q anywhere before
  // the second tag kills the run.
  auto wStep = [&](int w, const Letter& l, bool bullet) -> int {
    bool barred = l.kind == LetterKind::BarredSend;
    bool isPQ = barred && l.action.actor == p && l.action.peer == q;
    bool toQ = barred && l.action.peer == q;
    switch (w) {
      case 0:
        if (bullet) return (toQ && l.action.actor != p) ? 1 : -1;
        return isPQ ? -1 : 0;
      case 1:
        if (bullet) return (isPQ && l.action.message == r.message) ? 2 : -1;
        return isPQ ? -1 : 1;
      default:
        return bullet ? -1 : 2;
    }
  };

  auto out = std::make_unique<ExplicitNfa>();
  out->letters = system_alphabet(cfm, true, true);
  for (int w = 0; w < 3; ++w)
    for (std::size_t d = 0; d < dStates; ++d)
      out->addState(w == 2 && d == CausalityTables::kDone,
                    "w" + std::to_string(w) + "/" + std::to_string(d));
  auto id = [&](int w, std::size_t d) {
    return static_cast<std::uint32_t>(w * dStates + d);
  };
  out->initialStates = {id(0, CausalityTables::kStart)};

  for (int w = 0; w < 3; ++w) {
    for (std::size_t d = 0; d < dStates; ++d) {
      std::uint64_t bit = std::uint64_t(1) << d;
      for (const Letter& l : out->letters) {
        for (bool bullet : {false, true}) {
          if (l.kind == LetterKind::Receive && bullet) continue;  // tags sit on sends
          int w2 = wStep(w, l, bullet);
          if (w2 < 0) continue;
          std::uint64_t next = l.kind == LetterKind::Receive
                                   ? tables.stepReceive(bit)
                                   : tables.stepSend(bit, l.action,
                                                     l.kind == LetterKind::BarredSend, bullet);
          for (std::size_t t = 0; t < dStates; ++t)
            if ((next >> t) & 1) out->addTransition(id(w, d), l, id(w2, t));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Atomicity tracker

namespace {

using Desc = AtomicTracker::Desc;
using Path = AtomicTracker::Path;

std::uint8_t fdirCode(const Desc& d, std::size_t P) {
  return static_cast<std::uint8_t>((std::size_t(d.sender) * P + d.target) * 2 + (d.marked ? 1 : 0));
}
std::uint8_t findCode(ProcessId p, std::size_t P) { return static_cast<std::uint8_t>(2 * P * P + p); }
std::uint8_t bawaitCode(ProcessId p, std::size_t P) {
  return static_cast<std::uint8_t>(2 * P * P + P + p);
}

Desc decodeFdir(std::uint8_t code, std::size_t P) {
  Desc d;
  d.marked = code & 1;
  std::size_t st = code >> 1;
  d.sender = static_cast<std::uint8_t>(st / P);
  d.target = static_cast<std::uint8_t>(st % P);
  return d;
}

bool directOk(const Desc& from, const Desc& to) {
  if (from.sender == to.sender) return true;
  return !from.marked && from.target == to.target;
}

void addPending(Path& path, std::uint8_t code) {
  path.pending.insert(std::upper_bound(path.pending.begin(), path.pending.end(), code), code);
}

bool removePending(Path& path, std::uint8_t code) {
  auto it = std::lower_bound(path.pending.begin(), path.pending.end(), code);
  if (it == path.pending.end() || *it != code) return false;
  path.pending.erase(it);
  return true;
}

std::uint32_t descProcs(const Desc& d) {
  std::uint32_t out = std::uint32_t(1) << d.sender;
  if (!d.marked) out |= std::uint32_t(1) << d.target;
  return out;
}

/// Path continuations when the current letter is guessed to lie on the path.
std::vector<Path> pathNodeOptions(const Path& path, const Desc& d, std::size_t P,
                                  std::size_t nodeCap) {
  std::vector<Path> out;
  if (std::size_t(path.nodesUsed) + 1 > nodeCap) return out;

  struct In {
    bool start;
    std::int16_t consume;  // pending code consumed, or -1
    std::int16_t add;      // pending code registered, or -1
  };
  std::vector<In> ins;
  if (!path.startSet) ins.push_back({true, -1, -1});
  {
    std::uint8_t prev = 0xff;
    for (std::uint8_t code : path.pending) {
      if (code == prev) continue;
      prev = code;
      if (code < 2 * P * P) {
        if (directOk(decodeFdir(code, P), d)) ins.push_back({false, code, -1});
      } else if (code < 2 * P * P + P) {
        ProcessId p = static_cast<ProcessId>(code - 2 * P * P);
        if (!d.marked && d.target == p) ins.push_back({false, code, -1});
      }
    }
  }
  if (!d.marked) ins.push_back({false, -1, bawaitCode(d.target, P)});  // entered from a later send

  struct Out {
    bool end;
    std::int16_t consume;
    std::int16_t add;
  };
  std::vector<Out> outs;
  if (!path.endSet) outs.push_back({true, -1, -1});
  outs.push_back({false, -1, fdirCode(d, P)});
  outs.push_back({false, -1, findCode(d.sender, P)});
  {
    std::uint8_t code = bawaitCode(d.sender, P);
    if (std::binary_search(path.pending.begin(), path.pending.end(), code))
      outs.push_back({false, code, -1});
  }

  for (const In& in : ins) {
    for (const Out& o : outs) {
      Path next = path;
      if (in.consume >= 0 && !removePending(next, static_cast<std::uint8_t>(in.consume))) continue;
      if (o.consume >= 0 && !removePending(next, static_cast<std::uint8_t>(o.consume))) continue;
      if (in.add >= 0) addPending(next, static_cast<std::uint8_t>(in.add));
      if (o.add >= 0) addPending(next, static_cast<std::uint8_t>(o.add));
      if (in.start) {
        next.startSet = true;
        next.startDesc = d;
      }
      if (o.end) {
        next.endSet = true;
        next.endDesc = d;
      }
      ++next.nodesUsed;
      out.push_back(std::move(next));
    }
  }
  return out;
}

bool pathComplete(const Path& path) {
  return path.startSet && path.endSet && path.pending.empty() && path.nodesUsed > 0;
}

}  // namespace

AtomicTracker AtomicTracker::fresh(std::size_t processCount) {
  if (processCount > 10) throw Error("atomicity tracker supports at most 10 processes");
  AtomicTracker t;
  t.perProcess.resize(processCount);
  return t;
}

std::vector<AtomicTracker> AtomicTracker::step(const Action& send, bool annotated) const {
  const std::size_t P = perProcess.size();
  Desc d{static_cast<std::uint8_t>(send.actor), static_cast<std::uint8_t>(send.peer), annotated};
  const std::size_t loopCap = P * P + P;
  const std::size_t cycleCap = P * loopCap;

  // Per-machine alternatives, index 0 = off-path.
  std::vector<std::vector<PerProcess>> perOpts(P);
  for (ProcessId p = 0; p < P; ++p) {
    const PerProcess& m = perProcess[p];
    bool isSendBy = send.actor == p;
    bool isMatchedTo = !annotated && send.peer == p;
    bool startWasSet = m.path.startSet;

    auto finishMonitors = [&](PerProcess& next, bool endDesignatedNow) {
      if (endDesignatedNow) {
        next.sendByBeforeEnd = m.sawSendBy;
        next.matchedToBeforeEnd = m.sawMatchedTo;
      }
      if (startWasSet) {
        if (isSendBy) next.sendByAfterStart = true;
        if (isMatchedTo) next.matchedToAfterStart = true;
      }
      next.sawSendBy = m.sawSendBy || isSendBy;
      next.sawMatchedTo = m.sawMatchedTo || isMatchedTo;
    };

    PerProcess skip = m;
    finishMonitors(skip, false);
    perOpts[p].push_back(std::move(skip));
    for (Path& path : pathNodeOptions(m.path, d, P, loopCap)) {
      PerProcess next = m;
      bool endNow = path.endSet && !m.path.endSet;
      next.path = std::move(path);
      finishMonitors(next, endNow);
      perOpts[p].push_back(std::move(next));
    }
  }

  std::vector<Cycle> cycleOpts;
  cycleOpts.push_back(cycle);
  for (Path& path : pathNodeOptions(cycle.path, d, P, cycleCap)) {
    Cycle next = cycle;
    next.path = std::move(path);
    next.witnessed |= descProcs(d);
    cycleOpts.push_back(std::move(next));
  }

  std::uint32_t nextActive = active | descProcs(d);

  std::vector<AtomicTracker> results;
  std::vector<std::size_t> idx(P + 1, 0);
  while (true) {
    AtomicTracker t;
    t.perProcess.reserve(P);
    for (ProcessId p = 0; p < P; ++p) t.perProcess.push_back(perOpts[p][idx[p]]);
    t.cycle = cycleOpts[idx[P]];
    t.active = nextActive;
    results.push_back(std::move(t));
    std::size_t k = 0;
    for (; k <= P; ++k) {
      std::size_t limit = k < P ? perOpts[k].size() : cycleOpts.size();
      if (++idx[k] < limit) break;
      idx[k] = 0;
    }
    if (k == P + 1) break;
  }
  return results;
}

bool AtomicTracker::accepting() const {
  if (active == 0) return false;
  const std::size_t P = perProcess.size();
  for (ProcessId p = 0; p < P; ++p) {
    const PerProcess& m = perProcess[p];
    bool isActive = (active >> p) & 1;
    if (!isActive) {
      if (m.path.startSet || m.path.endSet || !m.path.pending.empty()) return false;
      continue;
    }
    if (!pathComplete(m.path)) return false;
    // Path start: the process's last action; end: its first action. A receive
    // endpoint stands in for its matching send.
    const Desc& s = m.path.startDesc;
    const Desc& e = m.path.endDesc;
    if (m.sawMatchedTo) {
      if (s.marked || s.target != p || m.matchedToAfterStart) return false;
    } else {
      if (s.sender != p || m.sendByAfterStart) return false;
    }
    if (m.sawSendBy) {
      if (e.sender != p || m.sendByBeforeEnd) return false;
    } else {
      if (e.marked || e.target != p || m.matchedToBeforeEnd) return false;
    }
  }
  if (!pathComplete(cycle.path)) return false;
  if ((cycle.witnessed & active) != active) return false;
  if ((descProcs(cycle.path.startDesc) & descProcs(cycle.path.endDesc)) == 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Atomic exchange recognizer

namespace {

class AtomicExchangeNfa : public Nfa {
 public:
  AtomicExchangeNfa(const Cfm& cfm, const std::vector<LocalState>& from, DeafSet d,
                    std::optional<std::vector<LocalState>> to, std::optional<DeafSet> dPrime)
      : cfm_(cfm), table_(cfm), deaf0_(d), alphabet_(system_alphabet(cfm, true, false)) {
    from_ = table_.intern(from);
    if (to) to_ = table_.intern(*to);
    dPrime_ = dPrime;
  }

  const std::vector<Letter>& alphabet() const override { return alphabet_; }

  std::vector<std::uint32_t> initials() override {
    std::vector<std::uint32_t> out;
    for (std::uint32_t hat : table_.sendReachable(from_))
      out.push_back(intern(State{from_, hat, hat, deaf0_, AtomicTracker::fresh(cfm_.processCount())}));
    return out;
  }

  bool accepting(std::uint32_t id) override {
    const State& s = states_.at(id);
    if (s.first != s.hat) return false;
    if (to_ && s.second != *to_) return false;
    if (dPrime_ && s.deaf != *dPrime_) return false;
    return s.tracker.accepting();
  }

  void expand(std::uint32_t id,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override {
    State s = states_.at(id);
    for (const Letter& l : alphabet_) {
      const Action& a = l.action;
      bool annotated = l.kind == LetterKind::BarredSend;
      std::vector<std::uint32_t> firsts = table_.sendSuccessors(s.first, a);
      if (firsts.empty()) continue;
      if (!annotated) {
        if (deafContains(s.deaf, a.peer)) continue;
        auto seconds = table_.receiveSuccessors(s.second, receive(a.peer, a.actor, a.message));
        if (seconds.empty()) continue;
        auto trackers = s.tracker.step(a, false);
        for (std::uint32_t f : firsts)
          for (std::uint32_t r : seconds)
            for (const auto& t : trackers) sink(l, intern(State{f, r, s.hat, s.deaf, t}));
      } else {
        auto trackers = s.tracker.step(a, true);
        DeafSet dd = deafAdd(s.deaf, a.peer);
        for (std::uint32_t f : firsts)
          for (const auto& t : trackers) sink(l, intern(State{f, s.second, s.hat, dd, t}));
      }
    }
  }

  std::size_t statesInterned() const override { return states_.size(); }

 private:
  struct State {
    std::uint32_t first, second, hat;
    DeafSet deaf;
    AtomicTracker tracker;
    friend auto operator<=>(const State&, const State&) = default;
    friend bool operator==(const State&, const State&) = default;
  };

  std::uint32_t intern(State s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(states_.size());
    states_.push_back(s);
    index_.emplace(std::move(s), id);
    return id;
  }

  const Cfm& cfm_;
  GlobalStateTable table_;
  std::uint32_t from_;
  DeafSet deaf0_;
  std::optional<std::uint32_t> to_;
  std::optional<DeafSet> dPrime_;
  std::vector<Letter> alphabet_;
  std::vector<State> states_;
  std::map<State, std::uint32_t> index_;
};

}  // namespace

std::unique_ptr<Nfa> atomic_exchange_nfa(const Cfm& cfm, const std::vector<LocalState>& from,
                                         DeafSet d, std::optional<std::vector<LocalState>> to,
                                         std::optional<DeafSet> dPrime) {
  return std::make_unique<AtomicExchangeNfa>(cfm, from, d, std::move(to), dPrime);
}

std::unique_ptr<Nfa> complement_on_the_fly(std::shared_ptr<Nfa> inner) {
  return std::make_unique<ComplementNfa>(std::move(inner));
}

}  // namespace mbx
