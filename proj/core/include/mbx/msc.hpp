#pragma once

// Partial-order view of traces: message sequence charts, happens-before,
// buffer order, validity, equivalence, linearizations, marked projections,
// the partial product on viable sequences, and exchange structure.

#include <optional>
#include <string>
#include <vector>

#include "mbx/model.hpp"

namespace mbx {

/// The chart of a trace. Event i is position i of the originating trace, so
/// positions in sequences and events in the order coincide.
struct Msc {
  std::vector<Action> label;
  std::vector<std::int32_t> matchedReceive;  // per send event: receive index, or -1
  std::vector<std::int32_t> matchedSend;     // per receive event: send index, or -1

  std::size_t size() const { return label.size(); }
  bool isMatchedSend(std::size_t e) const {
    return label[e].isSend() && matchedReceive[e] >= 0;
  }
  bool isUnmatchedSend(std::size_t e) const {
    return label[e].isSend() && matchedReceive[e] < 0;
  }
};

/// Builds the chart of a p2p-viable trace; throws Error otherwise.
Msc msc_of(const Trace& trace);

/// Happens-before edges: per-process successor pairs plus send->receive.
std::vector<std::pair<std::size_t, std::size_t>> hb_edges(const Msc& msc);

/// Buffer-order edges between sends to the same buffer: matched before
/// unmatched, and matched pairs ordered as their receives.
std::vector<std::pair<std::size_t, std::size_t>> buffer_order(const Msc& msc,
                                                              const ProcessNetwork& net);

/// True iff happens-before together with the buffer order is acyclic.
/// Requires a many-to-one network.
bool is_valid(const Msc& msc, const ProcessNetwork& net);

/// Chart equality up to isomorphism, decided on per-process projections.
/// Both traces must be p2p-viable.
bool equivalent(const Trace& u, const Trace& v);

/// All linearizations of the transitive closure of hb plus buffer order.
/// Every returned trace is net-viable. Requires a many-to-one network.
std::vector<Trace> linearizations(const Msc& msc, const ProcessNetwork& net,
                                  std::uint64_t nodeCap = 1'000'000);

/// One linearization (least-index-first topological order), or nullopt if the
/// combined relation has a cycle.
std::optional<Trace> some_linearization(const Msc& msc, const ProcessNetwork& net);

/// An action with its unmatched-send annotation. Receives are never marked.
struct MarkedAction {
  Action action;
  bool unmatched = false;
  friend bool operator==(const MarkedAction&, const MarkedAction&) = default;
};

using MarkedTrace = std::vector<MarkedAction>;
using MsSequence = std::vector<MarkedAction>;  // sends only

/// Annotates every unmatched send of an mb-viable trace.
MarkedTrace mark(const Trace& trace);

/// The projection of mark(trace) onto (possibly annotated) sends.
MsSequence ms(const Trace& trace);

/// Partial product of net-viable sequences: defined iff no buffer with an
/// unmatched send in u is received from in v; the value is uv.
std::optional<Trace> product(const ProcessNetwork& net, const Trace& u, const Trace& v);

/// Viable and shaped sends-then-receives.
bool is_exchange(const ProcessNetwork& net, const Trace& trace);

/// Product-of-exchanges check by cutting at every receive-to-send boundary:
/// each maximal block must be viable standalone and the block product must be
/// defined. Any factorization into exchanges coarsens to these cuts, and
/// merging adjacent factors preserves product definedness, so the greedy cut
/// is exact.
bool is_synchronous(const ProcessNetwork& net, const Trace& trace);

/// Reorders the receive phase of an mb-exchange to follow the send order.
/// The result is mb-viable and equivalent to the input.
Trace normalize_exchange(const Trace& exchange);

/// DOT rendering: one column per process, solid arrows for matched messages,
/// open arrowheads for unmatched sends.
std::string msc_to_dot(const Msc& msc, const Cfm& cfm);

}  // namespace mbx
