#pragma once

// Shared example systems and traces. Each straight-line system realizes one
// scenario (every process runs its projection of the scenario once); the
// looped variants exercise unbounded behavior.

#include <random>

#include "mbx/decide.hpp"

namespace fixtures {

using namespace mbx;

/// Builds a system whose processes each run their projection of `scenario`
/// as a single chain of transitions.
Cfm straightLine(const std::string& name, std::size_t processCount, const Trace& scenario);

// Three processes; a pipeline where the first message is collected late and
// a final send stays pending. Viable under mailbox semantics and
// reschedulable into rounds.
Cfm pendingPipelineSystem();
Trace pendingPipelineTrace();

// Three processes; the opening send is received only after its target talked
// to everyone else, which welds everything into one irreducible block with a
// send after a receive. Not round-schedulable.
Cfm lateDeliverySystem();
Trace lateDeliveryTrace();

// Three processes; handshake between two of them whose closing send to the
// third overtakes a pending send under mailbox order. The peer-to-peer run
// exists but has no mailbox rescheduling.
Cfm overtakenRelaySystem();
Trace overtakenRelayTrace();

// Three processes; a long-delayed message is answered and relayed before its
// delivery. Mailbox-viable but not round-schedulable.
Cfm delayedEchoSystem();
Trace delayedEchoTrace();

// Three processes; a reply is pipelined past a pending send. Mailbox-viable,
// not round-schedulable (the pending send is welded into the block).
Cfm echoRingSystem();
Trace echoRingTrace();

// A matched handshake pair followed by one pending send to the same mailbox:
// two components, ordered under mailbox semantics but unordered peer-to-peer.
Trace crossedPairTrailingTrace();

// Two processes exchanging one crossing pair of messages: schedulable with
// rounds of two sends but not with single-send rounds.
Cfm crossingOnceSystem();
Trace crossingOnceTrace();

// The same exchange in a loop; rounds grow without bound.
Cfm crossingLoopSystem();

// Send projection with a fan-out from one sender and one pending send; the
// wrap-around path of its block visits all four positions.
MsSequence fanoutMs();

// Four processes; minimal-witness shape: a pending send, a relay detour, and
// a late receive by the second process. The appended receive stays
// reschedulable unless the detour is reversed.
Trace forkJoinPrefix();
Action forkJoinReceive();
Trace forkJoinReversedPrefix();
Action forkJoinReversedReceive();

// Letter automata for the relay-ring generator.
TextNfa letterAutomaton(const std::string& name, std::size_t chainLength,
                        const std::vector<std::string>& letters, bool loop);
TextNfa singleStateAutomaton(const std::string& letter);

// Uniformly random small systems for cross-validation.
Cfm randomSystem(std::mt19937& rng, std::size_t processes, std::size_t statesPerProcess,
                 std::size_t messages, std::size_t transitionsPerProcess);

}  // namespace fixtures
