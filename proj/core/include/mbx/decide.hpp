#pragma once

// Top-level decision procedures with witness extraction, plus the
// intersection-family benchmark generator.

#include <optional>
#include <string>

#include "mbx/commgraph.hpp"
#include "mbx/machines.hpp"
#include "mbx/nfa_format.hpp"

namespace mbx {

enum class Answer : std::uint8_t { Yes, No, BudgetExceeded };

struct DecisionStats {
  std::uint64_t statesExplored = 0;
  std::uint64_t millis = 0;
};

struct Verdict {
  Answer answer = Answer::Yes;
  std::optional<Trace> witness;       // replayable counterexample or reaching run
  std::optional<std::uint64_t> k;     // inferred round bound, when meaningful
  DecisionStats stats;
  std::string detail;                 // human-readable annotation

  bool yes() const { return answer == Answer::Yes; }
  bool no() const { return answer == Answer::No; }
};

struct DecideOptions {
  std::uint64_t budget = 1'000'000;  // explored-state cap per call
};

/// Global-state reachability under mailbox semantics, searching over
/// round-structured runs. Sound for round-schedulable systems (the caller can
/// establish that with check_sync first); a yes carries a reaching trace.
Verdict reachable(const Cfm& cfm, const std::vector<LocalState>& goal,
                  const DecideOptions& options = {});

enum class SyncEngine : std::uint8_t { Exact, Bounded };

struct SyncOptions : DecideOptions {
  SyncEngine engine = SyncEngine::Exact;
  /// Bounded engine knobs: sends per exchange and sends overall.
  std::size_t maxExchangeSends = 6;
  std::size_t maxTotalSends = 10;
};

/// Whether every mailbox trace can be rescheduled into a product of
/// send-then-receive rounds. A no carries a mailbox-viable witness trace that
/// admits no such rescheduling. The exact engine searches minimal witnesses
/// breadth-first by send count; the bounded engine enumerates concrete
/// exchanges up to its caps and cross-checks with the partial-order criteria.
Verdict check_sync(const Cfm& cfm, const SyncOptions& options = {});

/// Language inclusion of annotated round-structured traces in an
/// order-insensitive (receive-commuting) regular property. Throws Error when
/// the property is not closed under commuting adjacent receives of distinct
/// processes. A no carries a violating round-structured trace.
Verdict model_check(const Cfm& cfm, const ExplicitNfa& property,
                    const DecideOptions& options = {});

/// Closure of a regular property under commuting adjacent receives of
/// distinct processes, decided on the minimal complete DFA.
bool check_r_closed(const ExplicitNfa& property, std::string* offender = nullptr);

/// Whether every peer-to-peer trace can be rescheduled onto mailbox
/// semantics. Requires a round-schedulable system. A no carries a
/// peer-to-peer witness trace.
Verdict check_mbsim(const Cfm& cfm, const DecideOptions& options = {});

/// Round-schedulability with at most k sends per round; k may be large (the
/// check never enumerates up to k).
Verdict check_ksync(const Cfm& cfm, std::uint64_t k, const SyncOptions& options = {});

/// Finds the least k such that the system is k-round-schedulable, or answers
/// no when rounds grow without bound (or the system is not schedulable).
Verdict infer_k(const Cfm& cfm, const SyncOptions& options = {});

enum class Gadget : std::uint8_t { None, NonSync, NonSim };

/// Builds the letter-relay ring system for a family of letter automata: a
/// token letter circulates p1 -> ... -> pn -> p1 while every process runs its
/// automaton; a final cascade broadcasts `accept`. With a gadget, two extra
/// processes misbehave (in the chosen way) exactly when the cascade
/// completes, which ties the decision procedures to automata intersection.
Cfm gen_benchmark(const std::vector<TextNfa>& automata, Gadget gadget);

}  // namespace mbx
