#pragma once

// Brute-force reference implementations used to validate the decision
// engines at small scale. These share only the core model with the engines;
// matching, ordering relations, closures and component analysis are all
// recomputed here from first principles.

#include <cstdint>
#include <vector>

#include "mbx/msc.hpp"

namespace mbx::oracle {

/// Reachability over happens-before plus buffer-order edges, by explicit
/// transitive closure.
bool path_exists(const Msc& msc, const ProcessNetwork& net, std::size_t i, std::size_t j);

/// Decomposes an mb-viable trace into atomic factors and accepts iff every
/// factor's per-process projection is sends-then-receives.
bool is_synchronizable_bf(const Trace& trace);

/// Minimal round size of an mb-viable trace: the largest send count over its
/// atomic factors. UINT64_MAX when the trace is not synchronizable at all.
std::uint64_t min_k_bf(const Trace& trace);

/// A p2p-viable trace can be rescheduled onto mailbox semantics iff its chart
/// has no cycle through happens-before and the mailbox buffer order.
bool is_mbsim_bf(const Trace& trace);

/// Whether u followed by receive r (with u mb-viable and u.r p2p-viable) is
/// equivalent to some mb-viable sequence: no unmatched send to r's process
/// may reach the send matching r.
bool append_receive_viable(const Trace& u, const Action& r);

/// All p2p-viable interleavings with the same per-process projections as the
/// input (the chart-equivalence class).
std::vector<Trace> equivalent_reorderings(const Trace& trace, std::uint64_t nodeCap = 2'000'000);

/// Definitional product-of-exchanges check by exhaustive factorization.
bool is_synchronous_exhaustive(const ProcessNetwork& net, const Trace& trace);

/// Synchronizability by exhaustive search over the equivalence class.
bool is_synchronizable_exhaustive(const Trace& trace, std::uint64_t nodeCap = 2'000'000);

struct TraceRecord {
  Trace trace;
  bool synchronizable = false;
  std::uint64_t minK = 0;  // UINT64_MAX when not synchronizable
};

struct P2pRecord {
  Trace trace;
  bool mailboxSimilar = false;
};

/// Verdicts for every trace up to the bound, under both semantics.
struct Report {
  std::vector<TraceRecord> mb;
  std::vector<P2pRecord> p2p;
  bool allSynchronizable = true;
  std::uint64_t maxMinK = 0;          // over synchronizable mb traces
  bool allMailboxSimilar = true;
  std::vector<std::vector<LocalState>> reachableGlobals;  // via mb traces
};

Report exhaustive_verdicts(const Cfm& cfm, std::size_t bound, std::uint64_t nodeCap = 1'000'000);

}  // namespace mbx::oracle
