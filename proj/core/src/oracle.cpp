#include "mbx/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace mbx::oracle {

namespace {

std::size_t processSpan(const Trace& t) {
  ProcessId maxP = 0;
  for (const auto& a : t) maxP = std::max({maxP, a.actor, a.peer});
  return std::size_t(maxP) + 1;
}

// Per-channel FIFO matching recomputed locally: match[i] = partner of i or -1.
std::vector<std::int32_t> matchEvents(const Trace& t) {
  std::vector<std::int32_t> match(t.size(), -1);
  std::map<std::pair<ProcessId, ProcessId>, std::vector<std::size_t>> sent;
  std::map<std::pair<ProcessId, ProcessId>, std::size_t> consumed;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto ch = std::make_pair(t[i].channelFrom(), t[i].channelTo());
    if (t[i].isSend()) {
      sent[ch].push_back(i);
    } else {
      std::size_t k = consumed[ch]++;
      if (k >= sent[ch].size() || t[sent[ch][k]].message != t[i].message)
        throw Error("oracle: trace is not p2p-viable");
      match[i] = static_cast<std::int32_t>(sent[ch][k]);
      match[sent[ch][k]] = static_cast<std::int32_t>(i);
    }
  }
  return match;
}

// Adjacency matrix of (happens-before union buffer-order) edges, forward
// message arcs only.
std::vector<std::vector<bool>> hbBufferEdges(const Trace& t, const ProcessNetwork& net) {
  std::size_t n = t.size();
  auto match = matchEvents(t);
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::map<ProcessId, std::size_t> last;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = last.find(t[i].actor);
    if (it != last.end()) adj[it->second][i] = true;
    last[t[i].actor] = i;
    if (t[i].isSend() && match[i] >= 0) adj[i][match[i]] = true;
  }
  // Buffer order on sends to the same buffer.
  std::vector<std::size_t> rank(n, 0);
  std::map<ProcessId, std::size_t> counters;
  for (std::size_t i = 0; i < n; ++i) rank[i] = counters[t[i].actor]++;
  for (std::size_t e = 0; e < n; ++e) {
    if (!t[e].isSend()) continue;
    for (std::size_t f = 0; f < n; ++f) {
      if (e == f || !t[f].isSend()) continue;
      if (net.buffer(t[e]) != net.buffer(t[f])) continue;
      bool em = match[e] >= 0, fm = match[f] >= 0;
      if (em && !fm) adj[e][f] = true;
      if (em && fm && t[match[e]].actor == t[match[f]].actor && rank[match[e]] < rank[match[f]])
        adj[e][f] = true;
    }
  }
  return adj;
}

void warshall(std::vector<std::vector<bool>>& adj) {
  std::size_t n = adj.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (adj[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (adj[k][j]) adj[i][j] = true;
}

bool hasCycle(const std::vector<std::vector<bool>>& closed) {
  for (std::size_t i = 0; i < closed.size(); ++i)
    if (closed[i][i]) return true;
  return false;
}

// Communication edges (message arcs in both directions) and the component
// partition of the events, via closure.
std::vector<std::vector<std::size_t>> atomicComponents(const Trace& t, const ProcessNetwork& net) {
  std::size_t n = t.size();
  auto match = matchEvents(t);
  auto adj = hbBufferEdges(t, net);
  for (std::size_t i = 0; i < n; ++i)
    if (t[i].isSend() && match[i] >= 0) adj[match[i]][i] = true;  // message arcs both ways
  auto closed = adj;
  warshall(closed);
  std::vector<std::int32_t> comp(n, -1);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    groups.emplace_back();
    for (std::size_t j = i; j < n; ++j) {
      bool together = (i == j) || (closed[i][j] && closed[j][i]);
      if (comp[j] < 0 && together) {
        comp[j] = static_cast<std::int32_t>(groups.size() - 1);
        groups.back().push_back(j);
      }
    }
  }
  // Order groups topologically; least event first is enough here because we
  // re-sort with a direct check below.
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  // Fix-point bubble by the inter-component closure to get a topological order.
  auto before = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t x : a)
      for (std::size_t y : b)
        if (closed[x][y]) return true;
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
      if (before(groups[i + 1], groups[i]) && !before(groups[i], groups[i + 1])) {
        std::swap(groups[i], groups[i + 1]);
        changed = true;
      }
    }
  }
  return groups;
}

bool projectionIsSendsThenReceives(const Trace& t) {
  std::map<ProcessId, bool> seenReceive;
  for (const auto& a : t) {
    if (a.isReceive())
      seenReceive[a.actor] = true;
    else if (seenReceive[a.actor])
      return false;
  }
  return true;
}

}  // namespace

bool path_exists(const Msc& msc, const ProcessNetwork& net, std::size_t i, std::size_t j) {
  if (i == j) return true;
  auto adj = hbBufferEdges(msc.label, net);
  warshall(adj);
  return adj[i][j];
}

bool is_synchronizable_bf(const Trace& trace) {
  auto net = ProcessNetwork::mailbox(processSpan(trace));
  if (!is_viable(net, trace)) throw Error("oracle: trace is not mb-viable");
  for (const auto& group : atomicComponents(trace, net)) {
    Trace factor;
    for (std::size_t v : group) factor.push_back(trace[v]);
    if (!projectionIsSendsThenReceives(factor)) return false;
  }
  return true;
}

std::uint64_t min_k_bf(const Trace& trace) {
  auto net = ProcessNetwork::mailbox(processSpan(trace));
  if (!is_viable(net, trace)) throw Error("oracle: trace is not mb-viable");
  std::uint64_t k = 0;
  for (const auto& group : atomicComponents(trace, net)) {
    Trace factor;
    for (std::size_t v : group) factor.push_back(trace[v]);
    if (!projectionIsSendsThenReceives(factor)) return UINT64_MAX;
    std::uint64_t sends = 0;
    for (const auto& a : factor) sends += a.isSend() ? 1 : 0;
    k = std::max(k, sends);
  }
  return k;
}

bool is_mbsim_bf(const Trace& trace) {
  auto net = ProcessNetwork::mailbox(processSpan(trace));
  auto adj = hbBufferEdges(trace, net);  // throws when not p2p-viable
  warshall(adj);
  return !hasCycle(adj);
}

bool append_receive_viable(const Trace& u, const Action& r) {
  if (!r.isReceive()) throw Error("oracle: append_receive_viable expects a receive");
  std::size_t n = std::max(processSpan(u), std::size_t(std::max(r.actor, r.peer)) + 1);
  auto mb = ProcessNetwork::mailbox(n);
  if (!is_viable(mb, u)) throw Error("oracle: prefix is not mb-viable");
  Trace ur = u;
  ur.push_back(r);
  if (!is_viable(ProcessNetwork::p2p(n), ur))
    throw Error("oracle: appended trace is not p2p-viable");
  auto match = matchEvents(ur);
  std::size_t j = static_cast<std::size_t>(match[u.size()]);  // send matched by r
  auto adj = hbBufferEdges(u, mb);
  warshall(adj);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i == j) continue;
    if (!u[i].isSend() || u[i].peer != r.actor) continue;
    if (match[i] >= 0 && std::size_t(match[i]) < u.size()) continue;  // matched inside u
    if (i < j && adj[i][j]) return false;
  }
  return true;
}

std::vector<Trace> equivalent_reorderings(const Trace& trace, std::uint64_t nodeCap) {
  // Interleave the per-process projections every possible way; keep the
  // p2p-viable ones. Same projections plus viability is chart equality.
  std::size_t n = processSpan(trace);
  std::vector<Trace> projections(n);
  for (ProcessId p = 0; p < n; ++p) projections[p] = projection(trace, p);
  std::vector<Trace> out;
  std::vector<std::size_t> cursor(n, 0);
  Trace current;
  std::uint64_t nodes = 0;

  auto viablePrefix = [&](const Trace& prefix) {
    // Incremental check would be faster; brute force is the point here.
    return is_viable(ProcessNetwork::p2p(n), prefix);
  };

  std::function<void()> go = [&]() {
    if (++nodes > nodeCap) throw BudgetExceeded(nodeCap);
    if (current.size() == trace.size()) {
      out.push_back(current);
      return;
    }
    for (ProcessId p = 0; p < n; ++p) {
      if (cursor[p] >= projections[p].size()) continue;
      const Action& a = projections[p][cursor[p]];
      current.push_back(a);
      if (a.isSend() || viablePrefix(current)) {
        ++cursor[p];
        go();
        --cursor[p];
      }
      current.pop_back();
    }
  };
  go();
  return out;
}

bool is_synchronous_exhaustive(const ProcessNetwork& net, const Trace& trace) {
  if (!is_viable(net, trace)) return false;
  // Try every split point: a viable sends-then-receives prefix whose product
  // with a synchronous remainder is defined.
  std::function<bool(const Trace&, std::vector<bool>&)> rec =
      [&](const Trace& rest, std::vector<bool>& blockedBuffers) -> bool {
    if (rest.empty()) return true;
    for (std::size_t cut = 1; cut <= rest.size(); ++cut) {
      Trace head(rest.begin(), rest.begin() + cut);
      bool shaped = true;
      bool sawReceive = false;
      for (const auto& a : head) {
        if (a.isReceive())
          sawReceive = true;
        else if (sawReceive)
          shaped = false;
      }
      if (!shaped || !is_viable(net, head)) continue;
      bool blocked = false;
      for (const auto& a : head)
        if (a.isReceive() && blockedBuffers[net.buffer(a)]) blocked = true;
      if (blocked) continue;
      auto match = matchEvents(head);
      std::vector<std::size_t> newlyBlocked;
      for (std::size_t i = 0; i < head.size(); ++i) {
        if (head[i].isSend() && match[i] < 0 && !blockedBuffers[net.buffer(head[i])]) {
          blockedBuffers[net.buffer(head[i])] = true;
          newlyBlocked.push_back(net.buffer(head[i]));
        }
      }
      Trace tail(rest.begin() + cut, rest.end());
      if (rec(tail, blockedBuffers)) return true;
      for (std::size_t b : newlyBlocked) blockedBuffers[b] = false;
    }
    return false;
  };
  std::vector<bool> blockedBuffers(net.bufferCount(), false);
  return rec(trace, blockedBuffers);
}

bool is_synchronizable_exhaustive(const Trace& trace, std::uint64_t nodeCap) {
  auto net = ProcessNetwork::mailbox(processSpan(trace));
  if (!is_viable(net, trace)) throw Error("oracle: trace is not mb-viable");
  for (const Trace& v : equivalent_reorderings(trace, nodeCap)) {
    if (is_viable(net, v) && is_synchronous_exhaustive(net, v)) return true;
  }
  return false;
}

Report exhaustive_verdicts(const Cfm& cfm, std::size_t bound, std::uint64_t nodeCap) {
  Report report;
  auto mb = ProcessNetwork::mailbox(cfm.processCount());
  auto p2p = ProcessNetwork::p2p(cfm.processCount());
  std::set<std::vector<LocalState>> globals;
  for (const Trace& t : traces_up_to(cfm, mb, bound, nodeCap)) {
    TraceRecord rec;
    rec.trace = t;
    rec.minK = min_k_bf(t);
    rec.synchronizable = rec.minK != UINT64_MAX;
    if (!rec.synchronizable) report.allSynchronizable = false;
    if (rec.synchronizable) report.maxMinK = std::max(report.maxMinK, rec.minK);
    auto res = run(cfm, mb, t);
    globals.insert(res.finalConfig->locals);
    report.mb.push_back(std::move(rec));
  }
  for (const Trace& t : traces_up_to(cfm, p2p, bound, nodeCap)) {
    P2pRecord rec;
    rec.trace = t;
    rec.mailboxSimilar = is_mbsim_bf(t);
    if (!rec.mailboxSimilar) report.allMailboxSimilar = false;
    report.p2p.push_back(std::move(rec));
  }
  report.reachableGlobals.assign(globals.begin(), globals.end());
  return report;
}

}  // namespace mbx::oracle
