#include "mbx/commgraph.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <sstream>

namespace mbx {

std::vector<std::vector<std::size_t>> CommGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(eventCount);
  for (const auto& e : edges) adj[e.from].push_back(e.to);
  return adj;
}

CommGraph comm_graph(const Trace& trace, const ProcessNetwork& net) {
  net.requireManyToOne("comm_graph");
  if (!is_viable(net, trace)) throw Error("comm_graph: trace is not viable for this network");
  Msc m = msc_of(trace);
  CommGraph g;
  g.eventCount = m.size();
  std::vector<std::int32_t> lastOf;
  for (std::size_t i = 0; i < m.size(); ++i) {
    ProcessId p = m.label[i].actor;
    if (p >= lastOf.size()) lastOf.resize(p + 1, -1);
    if (lastOf[p] >= 0) g.edges.push_back({std::size_t(lastOf[p]), i, CommEdgeKind::Process});
    lastOf[p] = static_cast<std::int32_t>(i);
    if (m.isMatchedSend(i)) {
      g.edges.push_back({i, std::size_t(m.matchedReceive[i]), CommEdgeKind::Message});
      g.edges.push_back({std::size_t(m.matchedReceive[i]), i, CommEdgeKind::Message});
    }
  }
  for (auto [a, b] : buffer_order(m, net)) g.edges.push_back({a, b, CommEdgeKind::Buffer});
  return g;
}

namespace {

// Tarjan over an explicit adjacency list.
struct TarjanScc {
  const std::vector<std::vector<std::size_t>>& adj;
  std::vector<std::int32_t> index, low, comp;
  std::vector<std::size_t> stack;
  std::vector<bool> onStack;
  std::int32_t next = 0, comps = 0;

  explicit TarjanScc(const std::vector<std::vector<std::size_t>>& a)
      : adj(a), index(a.size(), -1), low(a.size(), 0), comp(a.size(), -1), onStack(a.size(), false) {
    for (std::size_t v = 0; v < a.size(); ++v)
      if (index[v] < 0) dfs(v);
  }

  void dfs(std::size_t v) {
    index[v] = low[v] = next++;
    stack.push_back(v);
    onStack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (onStack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      while (true) {
        std::size_t w = stack.back();
        stack.pop_back();
        onStack[w] = false;
        comp[w] = comps;
        if (w == v) break;
      }
      ++comps;
    }
  }
};

}  // namespace

std::vector<std::vector<std::size_t>> comm_sccs(const Trace& trace, const ProcessNetwork& net) {
  CommGraph g = comm_graph(trace, net);
  auto adj = g.adjacency();
  TarjanScc scc(adj);
  std::vector<std::vector<std::size_t>> groups(scc.comps);
  for (std::size_t v = 0; v < adj.size(); ++v) groups[scc.comp[v]].push_back(v);
  // Topological order with deterministic tie-break: sort by least event.
  // Events within a group are already ascending.
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  // Verify the ordering is topological (least-event order respects edges for
  // viable traces only when edges do not jump backward across components;
  // buffer-order arcs can, so fix up with a stable topological sort).
  std::vector<std::size_t> groupOf(adj.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (std::size_t v : groups[gi]) groupOf[v] = gi;
  std::vector<std::vector<std::size_t>> dag(groups.size());
  std::vector<std::size_t> indeg(groups.size(), 0);
  for (const auto& e : g.edges) {
    std::size_t a = groupOf[e.from], b = groupOf[e.to];
    if (a != b) dag[a].push_back(b);
  }
  for (auto& outs : dag) {
    std::sort(outs.begin(), outs.end());
    outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
    for (std::size_t b : outs) ++indeg[b];
  }
  std::vector<std::size_t> order;
  std::vector<bool> emitted(groups.size(), false);
  while (order.size() < groups.size()) {
    std::size_t pick = groups.size();
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
      if (!emitted[gi] && indeg[gi] == 0) {
        pick = gi;
        break;
      }
    assert(pick < groups.size() && "condensation must be acyclic");
    emitted[pick] = true;
    order.push_back(pick);
    for (std::size_t b : dag[pick]) --indeg[b];
  }
  std::vector<std::vector<std::size_t>> sorted;
  sorted.reserve(groups.size());
  for (std::size_t gi : order) sorted.push_back(std::move(groups[gi]));
  return sorted;
}

bool is_atomic(const Trace& trace, const ProcessNetwork& net) {
  if (trace.empty()) return true;
  return comm_sccs(trace, net).size() == 1;
}

std::vector<DecomposedFactor> decompose(const Trace& trace, const ProcessNetwork& net) {
  net.requireManyToOne("decompose");
  if (trace.empty()) return {};
  auto groups = comm_sccs(trace, net);
  std::vector<DecomposedFactor> out;
  out.reserve(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    Trace factor;
    for (std::size_t v : groups[gi]) factor.push_back(trace[v]);
    out.push_back(DecomposedFactor{std::move(factor), gi + 1});
  }
  // The factor product must be defined, viable, and equivalent to the input.
  Trace prod;
  for (const auto& f : out) {
    if (f.factor.empty() || !is_viable(net, f.factor))
      throw Error("decompose: produced a non-viable factor");
    auto next = product(net, prod, f.factor);
    if (!next) throw Error("decompose: factor product is undefined");
    prod = std::move(*next);
  }
  if (!is_viable(net, prod) || !equivalent(prod, trace))
    throw Error("decompose: factor product is not equivalent to the input");
  return out;
}

Skeleton skeleton(const Trace& trace, const ProcessNetwork& net) {
  net.requireManyToOne("skeleton");
  CommGraph g = comm_graph(trace, net);
  auto groups = comm_sccs(trace, net);
  std::vector<std::size_t> groupOf(g.eventCount);
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (std::size_t v : groups[gi]) groupOf[v] = gi;
  Skeleton sk;
  sk.count = groups.size();
  sk.strictlyBelow.assign(sk.count, std::vector<bool>(sk.count, false));
  for (const auto& e : g.edges) {
    if (e.kind == CommEdgeKind::Message) continue;  // only process and buffer arcs induce the order
    std::size_t a = groupOf[e.from], b = groupOf[e.to];
    if (a != b) sk.strictlyBelow[a][b] = true;
  }
  for (std::size_t k = 0; k < sk.count; ++k)
    for (std::size_t i = 0; i < sk.count; ++i)
      for (std::size_t j = 0; j < sk.count; ++j)
        if (sk.strictlyBelow[i][k] && sk.strictlyBelow[k][j]) sk.strictlyBelow[i][j] = true;
  return sk;
}

bool direct_arc(const MsSequence& v, std::size_t i, std::size_t j) {
  if (i >= j) return false;
  const MarkedAction& a = v[i];
  const MarkedAction& b = v[j];
  if (a.action.actor == b.action.actor) return true;
  return a.action.peer == b.action.peer && !a.unmatched;
}

bool indirect_arc(const MsSequence& v, std::size_t i, std::size_t j) {
  if (i == j) return false;
  const MarkedAction& a = v[i];
  const MarkedAction& b = v[j];
  return !b.unmatched && b.action.peer == a.action.actor;
}

std::optional<WellLabeling> find_well_labeling(const MsSequence& v, std::size_t from,
                                               std::size_t to) {
  if (from >= v.size() || to >= v.size()) throw Error("find_well_labeling: position out of range");
  // BFS over positions; shortest paths are simple, so the labeling is
  // injective by construction.
  std::vector<std::int32_t> parent(v.size(), -1);
  std::vector<bool> seen(v.size(), false);
  std::deque<std::size_t> frontier;
  seen[from] = true;
  frontier.push_back(from);
  while (!frontier.empty()) {
    std::size_t cur = frontier.front();
    frontier.pop_front();
    if (cur == to) break;
    for (std::size_t next = 0; next < v.size(); ++next) {
      if (seen[next]) continue;
      if (direct_arc(v, cur, next) || indirect_arc(v, cur, next)) {
        seen[next] = true;
        parent[next] = static_cast<std::int32_t>(cur);
        frontier.push_back(next);
      }
    }
  }
  if (!seen[to]) return std::nullopt;
  std::vector<std::size_t> path;
  for (std::size_t cur = to;; cur = static_cast<std::size_t>(parent[cur])) {
    path.push_back(cur);
    if (cur == from) break;
  }
  std::reverse(path.begin(), path.end());
  WellLabeling wl;
  wl.positions = std::move(path);
  for (std::size_t k = 0; k + 1 < wl.positions.size(); ++k) {
    wl.arcs.push_back(direct_arc(v, wl.positions[k], wl.positions[k + 1]) ? ArcKind::Direct
                                                                          : ArcKind::Indirect);
  }
  return wl;
}

std::string comm_graph_to_dot(const CommGraph& g, const Trace& trace, const Cfm& cfm) {
  std::ostringstream out;
  out << "digraph comm {\n  node [shape=circle fontsize=10];\n";
  for (std::size_t i = 0; i < g.eventCount; ++i)
    out << "  e" << i << " [label=\"" << cfm.actionText(trace[i]) << "\"];\n";
  for (const auto& e : g.edges) {
    const char* style = e.kind == CommEdgeKind::Process  ? "solid"
                        : e.kind == CommEdgeKind::Buffer ? "dashed"
                                                         : "bold";
    out << "  e" << e.from << " -> e" << e.to << " [style=" << style << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string condensation_to_dot(const Trace& trace, const ProcessNetwork& net, const Cfm& cfm) {
  auto groups = comm_sccs(trace, net);
  Skeleton sk = skeleton(trace, net);
  std::ostringstream out;
  out << "digraph condensation {\n  node [shape=box fontsize=10];\n";
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    out << "  c" << gi + 1 << " [label=\"" << gi + 1 << ": ";
    for (std::size_t k = 0; k < groups[gi].size(); ++k) {
      if (k) out << " ";
      out << cfm.actionText(trace[groups[gi][k]]);
    }
    out << "\"];\n";
  }
  for (std::size_t i = 1; i <= sk.count; ++i)
    for (std::size_t j = 1; j <= sk.count; ++j)
      if (i != j && sk.precedes(i, j)) out << "  c" << i << " -> c" << j << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace mbx
