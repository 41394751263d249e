#include "mbx/msc.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace mbx {

Msc msc_of(const Trace& trace) {
  Msc m;
  m.label = trace;
  m.matchedReceive.assign(trace.size(), -1);
  m.matchedSend.assign(trace.size(), -1);
  // Per-channel FIFO matching: the k-th receive on a channel pairs with the
  // k-th send on it.
  std::map<std::pair<ProcessId, ProcessId>, std::deque<std::size_t>> pending;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Action& a = trace[i];
    auto ch = std::make_pair(a.channelFrom(), a.channelTo());
    if (a.isSend()) {
      pending[ch].push_back(i);
    } else {
      auto& q = pending[ch];
      if (q.empty()) throw Error("trace is not p2p-viable: unmatched receive");
      std::size_t s = q.front();
      q.pop_front();
      if (trace[s].message != a.message)
        throw Error("trace is not p2p-viable: receive does not match channel head");
      m.matchedReceive[s] = static_cast<std::int32_t>(i);
      m.matchedSend[i] = static_cast<std::int32_t>(s);
    }
  }
  return m;
}

std::vector<std::pair<std::size_t, std::size_t>> hb_edges(const Msc& msc) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::int32_t> lastOf;
  for (std::size_t i = 0; i < msc.size(); ++i) {
    ProcessId p = msc.label[i].actor;
    if (p >= lastOf.size()) lastOf.resize(p + 1, -1);
    if (lastOf[p] >= 0) edges.emplace_back(lastOf[p], i);
    lastOf[p] = static_cast<std::int32_t>(i);
    if (msc.label[i].isSend() && msc.matchedReceive[i] >= 0)
      edges.emplace_back(i, msc.matchedReceive[i]);
  }
  return edges;
}

std::vector<std::pair<std::size_t, std::size_t>> buffer_order(const Msc& msc,
                                                              const ProcessNetwork& net) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> sends;
  for (std::size_t i = 0; i < msc.size(); ++i)
    if (msc.label[i].isSend()) sends.push_back(i);
  // Receive position within the receiver's projection orders matched pairs.
  std::vector<std::size_t> rankOnProcess(msc.size(), 0);
  std::vector<std::size_t> counters;
  for (std::size_t i = 0; i < msc.size(); ++i) {
    ProcessId p = msc.label[i].actor;
    if (p >= counters.size()) counters.resize(p + 1, 0);
    rankOnProcess[i] = counters[p]++;
  }
  for (std::size_t e : sends) {
    for (std::size_t f : sends) {
      if (e == f) continue;
      if (net.buffer(msc.label[e]) != net.buffer(msc.label[f])) continue;
      bool eMatched = msc.matchedReceive[e] >= 0;
      bool fMatched = msc.matchedReceive[f] >= 0;
      if (eMatched && !fMatched) {
        edges.emplace_back(e, f);
      } else if (eMatched && fMatched) {
        std::size_t re = msc.matchedReceive[e], rf = msc.matchedReceive[f];
        if (msc.label[re].actor == msc.label[rf].actor && rankOnProcess[re] < rankOnProcess[rf])
          edges.emplace_back(e, f);
      }
    }
  }
  return edges;
}

namespace {

// Cycle check over an edge list on msc events.
bool acyclic(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::size_t> indeg(n, 0);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    ++indeg[b];
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  std::size_t seen = 0;
  while (!ready.empty()) {
    std::size_t v = ready.front();
    ready.pop_front();
    ++seen;
    for (std::size_t w : adj[v])
      if (--indeg[w] == 0) ready.push_back(w);
  }
  return seen == n;
}

}  // namespace

bool is_valid(const Msc& msc, const ProcessNetwork& net) {
  net.requireManyToOne("is_valid");
  auto edges = hb_edges(msc);
  auto extra = buffer_order(msc, net);
  edges.insert(edges.end(), extra.begin(), extra.end());
  return acyclic(msc.size(), edges);
}

bool equivalent(const Trace& u, const Trace& v) {
  // Both must be p2p-viable; isomorphism then reduces to projections.
  (void)msc_of(u);
  (void)msc_of(v);
  ProcessId maxP = 0;
  for (const auto& a : u) maxP = std::max(maxP, a.actor);
  for (const auto& a : v) maxP = std::max(maxP, a.actor);
  for (ProcessId p = 0; p <= maxP; ++p)
    if (projection(u, p) != projection(v, p)) return false;
  return true;
}

namespace {

void linearize(const Msc& msc, const std::vector<std::vector<std::size_t>>& adj,
               std::vector<std::size_t>& indeg, Trace& current, std::uint64_t& nodes,
               std::uint64_t cap, std::vector<Trace>& out) {
  if (++nodes > cap) throw BudgetExceeded(cap);
  if (current.size() == msc.size()) {
    out.push_back(current);
    return;
  }
  for (std::size_t v = 0; v < msc.size(); ++v) {
    if (indeg[v] != 0) continue;
    indeg[v] = SIZE_MAX;  // taken
    for (std::size_t w : adj[v]) --indeg[w];
    current.push_back(msc.label[v]);
    linearize(msc, adj, indeg, current, nodes, cap, out);
    current.pop_back();
    for (std::size_t w : adj[v]) ++indeg[w];
    indeg[v] = 0;
  }
}

std::vector<std::vector<std::size_t>> combinedAdjacency(const Msc& msc,
                                                        const ProcessNetwork& net) {
  auto edges = hb_edges(msc);
  auto extra = buffer_order(msc, net);
  edges.insert(edges.end(), extra.begin(), extra.end());
  std::vector<std::vector<std::size_t>> adj(msc.size());
  for (auto [a, b] : edges) adj[a].push_back(b);
  return adj;
}

}  // namespace

std::vector<Trace> linearizations(const Msc& msc, const ProcessNetwork& net,
                                  std::uint64_t nodeCap) {
  net.requireManyToOne("linearizations");
  auto adj = combinedAdjacency(msc, net);
  std::vector<std::size_t> indeg(msc.size(), 0);
  for (std::size_t v = 0; v < msc.size(); ++v)
    for (std::size_t w : adj[v]) ++indeg[w];
  std::vector<Trace> out;
  Trace current;
  std::uint64_t nodes = 0;
  linearize(msc, adj, indeg, current, nodes, nodeCap, out);
  return out;
}

std::optional<Trace> some_linearization(const Msc& msc, const ProcessNetwork& net) {
  net.requireManyToOne("some_linearization");
  auto adj = combinedAdjacency(msc, net);
  std::vector<std::size_t> indeg(msc.size(), 0);
  for (std::size_t v = 0; v < msc.size(); ++v)
    for (std::size_t w : adj[v]) ++indeg[w];
  Trace out;
  std::vector<bool> done(msc.size(), false);
  for (std::size_t taken = 0; taken < msc.size(); ++taken) {
    std::size_t pick = msc.size();
    for (std::size_t v = 0; v < msc.size(); ++v) {
      if (!done[v] && indeg[v] == 0) {
        pick = v;
        break;
      }
    }
    if (pick == msc.size()) return std::nullopt;
    done[pick] = true;
    indeg[pick] = SIZE_MAX;
    for (std::size_t w : adj[pick]) --indeg[w];
    out.push_back(msc.label[pick]);
  }
  return out;
}

MarkedTrace mark(const Trace& trace) {
  if (!is_viable(ProcessNetwork::mailbox(
          [&] {
            ProcessId maxP = 0;
            for (const auto& a : trace) maxP = std::max({maxP, a.actor, a.peer});
            return std::size_t(maxP) + 1;
          }()),
          trace))
    throw Error("mark: trace is not mb-viable");
  Msc m = msc_of(trace);
  MarkedTrace out;
  out.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i)
    out.push_back(MarkedAction{trace[i], m.isUnmatchedSend(i)});
  return out;
}

MsSequence ms(const Trace& trace) {
  MarkedTrace marked = mark(trace);
  MsSequence out;
  for (const auto& ma : marked)
    if (ma.action.isSend()) out.push_back(ma);
  return out;
}

std::optional<Trace> product(const ProcessNetwork& net, const Trace& u, const Trace& v) {
  Msc mu = msc_of(u);
  std::vector<bool> blockedBuffer(net.bufferCount(), false);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (mu.isUnmatchedSend(i)) blockedBuffer[net.buffer(u[i])] = true;
  for (const auto& a : v)
    if (a.isReceive() && blockedBuffer[net.buffer(a)]) return std::nullopt;
  Trace uv = u;
  uv.insert(uv.end(), v.begin(), v.end());
  return uv;
}

bool is_exchange(const ProcessNetwork& net, const Trace& trace) {
  bool seenReceive = false;
  for (const auto& a : trace) {
    if (a.isReceive())
      seenReceive = true;
    else if (seenReceive)
      return false;
  }
  return is_viable(net, trace);
}

bool is_synchronous(const ProcessNetwork& net, const Trace& trace) {
  if (!is_viable(net, trace)) return false;
  // Cut maximal sends-then-receives blocks.
  std::vector<Trace> blocks;
  Trace current;
  bool inReceives = false;
  for (const auto& a : trace) {
    if (a.isSend() && inReceives) {
      blocks.push_back(current);
      current.clear();
      inReceives = false;
    }
    if (a.isReceive()) inReceives = true;
    current.push_back(a);
  }
  if (!current.empty()) blocks.push_back(current);

  std::vector<bool> blockedBuffer(net.bufferCount(), false);
  for (const auto& block : blocks) {
    if (!is_viable(net, block)) return false;
    Msc m = msc_of(block);
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (block[i].isReceive() && blockedBuffer[net.buffer(block[i])]) return false;
    }
    for (std::size_t i = 0; i < block.size(); ++i)
      if (m.isUnmatchedSend(i)) blockedBuffer[net.buffer(block[i])] = true;
  }
  return true;
}

Trace normalize_exchange(const Trace& exchange) {
  ProcessId maxP = 0;
  for (const auto& a : exchange) maxP = std::max({maxP, a.actor, a.peer});
  auto net = ProcessNetwork::mailbox(std::size_t(maxP) + 1);
  if (!is_exchange(net, exchange)) throw Error("normalize_exchange: input is not an mb-exchange");
  Msc m = msc_of(exchange);
  Trace out;
  for (std::size_t i = 0; i < exchange.size(); ++i)
    if (exchange[i].isSend()) out.push_back(exchange[i]);
  for (std::size_t i = 0; i < exchange.size(); ++i)
    if (m.isMatchedSend(i)) out.push_back(exchange[m.matchedReceive[i]]);
  return out;
}

std::string msc_to_dot(const Msc& msc, const Cfm& cfm) {
  std::ostringstream out;
  out << "digraph msc {\n  rankdir=TB;\n  node [shape=plaintext fontsize=10];\n";
  std::vector<std::vector<std::size_t>> byProcess(cfm.processCount());
  for (std::size_t i = 0; i < msc.size(); ++i) byProcess[msc.label[i].actor].push_back(i);
  for (std::size_t p = 0; p < cfm.processCount(); ++p) {
    out << "  subgraph cluster_p" << p << " {\n    label=\"" << cfm.processes[p].name
        << "\";\n    color=gray;\n";
    const auto& evs = byProcess[p];
    for (std::size_t e : evs)
      out << "    e" << e << " [label=\"" << cfm.actionText(msc.label[e]) << "\"];\n";
    for (std::size_t k = 1; k < evs.size(); ++k)
      out << "    e" << evs[k - 1] << " -> e" << evs[k] << " [style=dotted arrowhead=none];\n";
    out << "  }\n";
  }
  for (std::size_t i = 0; i < msc.size(); ++i) {
    if (!msc.label[i].isSend()) continue;
    if (msc.matchedReceive[i] >= 0) {
      out << "  e" << i << " -> e" << msc.matchedReceive[i] << " [color=black];\n";
    } else {
      out << "  u" << i << " [label=\"\" shape=point style=invis];\n";
      out << "  e" << i << " -> u" << i << " [arrowhead=empty];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace mbx
