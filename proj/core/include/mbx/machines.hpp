#pragma once

// The automaton constructions behind the decision procedures: the annotated
// asynchronous product, the exchange lifting that reads send projections of
// round-structured sequences, exchange and atomic-exchange recognizers, and
// the small causality and similarity machines.

#include <memory>
#include <optional>

#include "mbx/msc.hpp"
#include "mbx/nfa.hpp"

namespace mbx {

/// Set of processes barred from receiving, as a bitset. At most 32 processes.
using DeafSet = std::uint32_t;

inline bool deafContains(DeafSet d, ProcessId p) { return (d >> p) & 1u; }
inline DeafSet deafAdd(DeafSet d, ProcessId p) { return d | (DeafSet(1) << p); }

/// Global states are interned vectors of local states.
class GlobalStateTable {
 public:
  explicit GlobalStateTable(const Cfm& cfm);
  std::uint32_t intern(const std::vector<LocalState>& locals);
  const std::vector<LocalState>& locals(std::uint32_t id) const { return states_.at(id); }
  std::uint32_t initial();

  /// Successors of a global state by one local send/receive transition.
  std::vector<std::uint32_t> sendSuccessors(std::uint32_t g, const Action& send);
  std::vector<std::uint32_t> receiveSuccessors(std::uint32_t g, const Action& recv);
  bool hasReceiveTransition(std::uint32_t g, const Action& recv);

  /// Componentwise send-phase reachability: every global state whose p-th
  /// component is send-reachable from g's p-th component. Used to bound the
  /// guessed mid-exchange states.
  std::vector<std::uint32_t> sendReachable(std::uint32_t g);

  const Cfm& cfm() const { return cfm_; }
  std::size_t size() const { return states_.size(); }

 private:
  const std::vector<LocalState>& localSendReach(ProcessId p, LocalState s);
  const Cfm& cfm_;
  std::vector<std::vector<LocalState>> states_;
  std::map<std::vector<LocalState>, std::uint32_t> index_;
  std::map<std::pair<ProcessId, LocalState>, std::vector<LocalState>> sendReachCache_;
};

/// All sends, annotated sends, and receives of a system's action vocabulary.
std::vector<Letter> system_alphabet(const Cfm& cfm, bool withBarred, bool withReceives);

/// The asynchronous product of the per-process machines, extended with an
/// annotated copy of every send transition. Every state accepts. The result
/// commutes receives of distinct processes by construction.
class SystemNfa : public Nfa {
 public:
  explicit SystemNfa(const Cfm& cfm);

  GlobalStateTable& table() { return table_; }
  const Cfm& cfm() const { return cfm_; }

  const std::vector<Letter>& alphabet() const override { return alphabet_; }
  std::vector<std::uint32_t> initials() override { return {table_.initial()}; }
  bool accepting(std::uint32_t) override { return true; }
  void expand(std::uint32_t state,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override;
  std::string describe(std::uint32_t state) override;
  std::size_t statesInterned() const override { return table_.size(); }

 private:
  const Cfm& cfm_;
  GlobalStateTable table_;
  std::vector<Letter> alphabet_;
};

std::unique_ptr<Nfa> async_product(const Cfm& cfm);

/// Options for the exchange lifting of a receive-diamond automaton.
struct SyncLiftOptions {
  /// Start pairs (inner state, deaf set).
  std::vector<std::pair<std::uint32_t, DeafSet>> starts;
  /// Acceptance over boundary pairs.
  std::function<bool(std::uint32_t, DeafSet)> finals;
  /// Validate the diamond property of the inner automaton first (the lifting
  /// is only sound on receive-diamond inputs). Construction-time guarantees
  /// may switch this off.
  bool validateRDiamond = true;
};

/// Lifts a receive-diamond automaton over sends/annotated-sends/receives to
/// one over send projections: a word is accepted iff it is the send
/// projection of some round-structured sequence the inner automaton accepts,
/// with deaf sets threaded across rounds.
std::unique_ptr<Nfa> sync_lift(std::shared_ptr<Nfa> inner, SyncLiftOptions options);

/// Recognizers for the send projections of executable single exchanges (B)
/// and round-structured sequences (C) between two (global state, deaf set)
/// pairs. Deaf successors are minimal.
struct ExchangePair {
  std::unique_ptr<Nfa> single;  // one exchange
  std::unique_ptr<Nfa> rounds;  // any product of exchanges
};
ExchangePair exchange_automata(const Cfm& cfm, const std::vector<LocalState>& from, DeafSet d,
                               const std::vector<LocalState>& to, DeafSet dPrime);

/// Sync(P): send projections of round-structured sequences whose annotated
/// form the property accepts. The property must be receive-diamond and
/// epsilon-free.
std::unique_ptr<Nfa> sync_of_property(std::shared_ptr<Nfa> property);

/// Small nondeterministic checker for causal paths between two tagged send
/// positions of an annotated sequence (process order, mailbox order, and
/// message-then-process-order hops). 4|P|+2 states.
std::unique_ptr<Nfa> causality_nfa(const Cfm& cfm);

/// The same checker over '#'-separated send projections: message hops resolve
/// at block dividers instead of at receive letters.
std::unique_ptr<Nfa> causality_nfa_hashed(const Cfm& cfm);

/// For a receive r = q?p(m): accepts the annotated form of a round-structured
/// sequence u iff u.r is p2p-viable and its chart cannot be rescheduled onto
/// mailbox semantics.
std::unique_ptr<Nfa> similarity_nfa(const Cfm& cfm, const Action& r);

/// Send projections of executable atomic exchanges from (from, d). When `to`
/// or `dPrime` are given, the landing pair is constrained as well.
std::unique_ptr<Nfa> atomic_exchange_nfa(const Cfm& cfm, const std::vector<LocalState>& from,
                                         DeafSet d,
                                         std::optional<std::vector<LocalState>> to = std::nullopt,
                                         std::optional<DeafSet> dPrime = std::nullopt);

/// On-the-fly complement (subset construction with flipped acceptance).
std::unique_ptr<Nfa> complement_on_the_fly(std::shared_ptr<Nfa> inner);

// ---------------------------------------------------------------------------
// Shared building blocks, exposed for the composed searches in decide.

/// Transition tables of the causality checker, shared by its automaton
/// wrapper and the subset-stepped copies inside the synchronizability search.
struct CausalityTables {
  // States: 0 = start, 1 = done, then 4 per process: order, mailbox,
  // message-send, message-receive.
  std::size_t processCount = 0;
  std::size_t stateCount() const { return 2 + 4 * processCount; }
  static constexpr std::uint32_t kStart = 0;
  static constexpr std::uint32_t kDone = 1;
  std::uint32_t orderState(ProcessId p) const { return 2 + 4 * std::uint32_t(p); }
  std::uint32_t mailboxState(ProcessId p) const { return 2 + 4 * std::uint32_t(p) + 1; }
  std::uint32_t msgSendState(ProcessId p) const { return 2 + 4 * std::uint32_t(p) + 2; }
  std::uint32_t msgRecvState(ProcessId p) const { return 2 + 4 * std::uint32_t(p) + 3; }

  /// Subset step on a send letter (annotated or not), optionally tagged.
  std::uint64_t stepSend(std::uint64_t subset, const Action& send, bool annotated,
                         bool bullet) const;
  /// Subset step on a receive letter (untagged); only the marked variant of
  /// the checker sees receives.
  std::uint64_t stepReceive(std::uint64_t subset) const;
  /// Subset step on the '#' divider (hashed variant only).
  std::uint64_t stepDivider(std::uint64_t subset) const;

  bool hasDone(std::uint64_t subset) const { return (subset >> kDone) & 1; }
};

/// The per-block atomicity tracker, embedded into atomic_exchange_nfa and
/// into the synchronizability search.
///
/// Strong connectivity of a block's communication graph is certified by one
/// labeled path per active process (from its last action back to its first)
/// plus one labeled path visiting every active process whose endpoints share
/// a process. Each path is guessed as positions are read, in bounded size.
/// A path is tracked as a multiset of pending arc obligations: a guessed
/// path node consumes the obligation of its incoming arc and produces one
/// for its outgoing arc (forward-direct, forward-indirect, or a registered
/// backward-indirect slot). Only descriptor data enters the obligations, so
/// equivalent guess orders collapse to one state.
struct AtomicTracker {
  /// Send descriptor: sender, target, and whether the send is annotated
  /// (stays unreceived). Message content is never stored.
  struct Desc {
    std::uint8_t sender = 0xff, target = 0xff;
    bool marked = false;
    friend bool operator==(const Desc&, const Desc&) = default;
    friend auto operator<=>(const Desc&, const Desc&) = default;
    bool valid() const { return sender != 0xff; }
  };

  /// One path-in-progress. Pending items are sorted obligation codes.
  struct Path {
    std::vector<std::uint8_t> pending;
    std::uint8_t nodesUsed = 0;
    bool startSet = false, endSet = false;
    Desc startDesc, endDesc;
    friend bool operator==(const Path&, const Path&) = default;
    friend auto operator<=>(const Path&, const Path&) = default;
  };

  struct PerProcess {
    Path path;
    bool sawSendBy = false, sawMatchedTo = false;
    bool sendByAfterStart = false, matchedToAfterStart = false;
    bool sendByBeforeEnd = false, matchedToBeforeEnd = false;
    friend bool operator==(const PerProcess&, const PerProcess&) = default;
    friend auto operator<=>(const PerProcess&, const PerProcess&) = default;
  };

  struct Cycle {
    Path path;
    std::uint32_t witnessed = 0;
    friend bool operator==(const Cycle&, const Cycle&) = default;
    friend auto operator<=>(const Cycle&, const Cycle&) = default;
  };

  std::vector<PerProcess> perProcess;
  Cycle cycle;
  std::uint32_t active = 0;  // processes with an action in the block so far

  friend bool operator==(const AtomicTracker&, const AtomicTracker&) = default;
  friend auto operator<=>(const AtomicTracker&, const AtomicTracker&) = default;

  static AtomicTracker fresh(std::size_t processCount);

  /// All tracker states after reading one more send letter.
  std::vector<AtomicTracker> step(const Action& send, bool annotated) const;

  /// Whether every per-process path and the cycle path certify strong
  /// connectivity of the block read so far (empty blocks fail).
  bool accepting() const;

  std::size_t processCount() const { return perProcess.size(); }
};

}  // namespace mbx
