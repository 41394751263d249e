#pragma once

// Communication graphs, strong-connectivity atomicity, decomposition into
// atomic factors, skeleton orders, and explicit well-labeling search.

#include <optional>
#include <string>
#include <vector>

#include "mbx/msc.hpp"

namespace mbx {

enum class CommEdgeKind : std::uint8_t { Process, Buffer, Message };

/// Directed graph on the events of a viable trace: process order, buffer
/// order, and both directions of every message pair.
struct CommGraph {
  std::size_t eventCount = 0;
  struct Edge {
    std::size_t from, to;
    CommEdgeKind kind;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adjacency() const;
};

CommGraph comm_graph(const Trace& trace, const ProcessNetwork& net);

/// Strongly connected components of the communication graph, indexed in
/// topological order; ties broken by least event position.
std::vector<std::vector<std::size_t>> comm_sccs(const Trace& trace, const ProcessNetwork& net);

/// A trace is atomic iff its communication graph is strongly connected.
/// The empty trace counts as atomic by convention.
bool is_atomic(const Trace& trace, const ProcessNetwork& net);

struct DecomposedFactor {
  Trace factor;
  std::size_t index;  // skeleton index, 1-based, in topological order
};

/// Splits a viable trace into its atomic non-empty factors. The factor
/// product is defined and equivalent to the input; both are asserted.
std::vector<DecomposedFactor> decompose(const Trace& trace, const ProcessNetwork& net);

/// Condensation order on the atomic factors, generated by process-order and
/// buffer-order arcs between components.
struct Skeleton {
  std::size_t count = 0;
  std::vector<std::vector<bool>> strictlyBelow;  // transitive closure
  bool precedes(std::size_t i, std::size_t j) const { return strictlyBelow[i - 1][j - 1]; }
};

Skeleton skeleton(const Trace& trace, const ProcessNetwork& net);

enum class ArcKind : std::uint8_t { Direct, Indirect };

/// An injective labeling of ms-sequence positions encoding a communication
/// graph path; consecutive labels are joined by direct or indirect arcs.
struct WellLabeling {
  std::vector<std::size_t> positions;  // in label order; positions[k] carries label k
  std::vector<ArcKind> arcs;           // arcs[k] joins labels k and k+1
  std::size_t size() const { return positions.size(); }
};

/// Direct arc: earlier position, same sender, or same mailbox with the first
/// send matched. Indirect arc: from a send by p to a matched send to p.
bool direct_arc(const MsSequence& v, std::size_t i, std::size_t j);
bool indirect_arc(const MsSequence& v, std::size_t i, std::size_t j);

/// Shortest well-labeling of v from position `from` to position `to`, or
/// nullopt when none exists. For v = ms(u) of an mb-exchange u, existence
/// coincides with communication-graph reachability between the two events.
std::optional<WellLabeling> find_well_labeling(const MsSequence& v, std::size_t from,
                                               std::size_t to);

std::string comm_graph_to_dot(const CommGraph& g, const Trace& trace, const Cfm& cfm);
std::string condensation_to_dot(const Trace& trace, const ProcessNetwork& net, const Cfm& cfm);

}  // namespace mbx
