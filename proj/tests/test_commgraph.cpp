#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "mbx/oracle.hpp"

using namespace mbx;
using namespace fixtures;

TEST_CASE("a matched pair is one strongly connected component") {
  auto mb = ProcessNetwork::mailbox(2);
  Trace t = {send(0, 1, 0), receive(1, 0, 0)};
  CommGraph g = comm_graph(t, mb);
  CHECK(g.eventCount == 2);
  CHECK(comm_sccs(t, mb).size() == 1);
  CHECK(is_atomic(t, mb));
}

TEST_CASE("the crossed pair with a trailing send has exactly two components") {
  auto mb = ProcessNetwork::mailbox(3);
  Trace t = crossedPairTrailingTrace();
  auto sccs = comm_sccs(t, mb);
  REQUIRE(sccs.size() == 2);
  CHECK(sccs[0].size() == 4);
  CHECK(sccs[1] == std::vector<std::size_t>{4});
  CHECK_FALSE(is_atomic(t, mb));

  SUBCASE("ordered under mailboxes, unordered peer to peer") {
    Skeleton skMb = skeleton(t, mb);
    REQUIRE(skMb.count == 2);
    CHECK(skMb.precedes(1, 2));
    CHECK_FALSE(skMb.precedes(2, 1));
    Skeleton skP2p = skeleton(t, ProcessNetwork::p2p(3));
    REQUIRE(skP2p.count == 2);
    CHECK_FALSE(skP2p.precedes(1, 2));
    CHECK_FALSE(skP2p.precedes(2, 1));
  }

  SUBCASE("decomposition splits off the trailing send") {
    auto factors = decompose(t, mb);
    REQUIRE(factors.size() == 2);
    CHECK(factors[0].factor.size() == 4);
    CHECK(factors[1].factor == Trace{t[4]});
    CHECK(factors[0].index == 1);
    CHECK(factors[1].index == 2);
  }
}

TEST_CASE("atomicity of small shapes") {
  auto mb2 = ProcessNetwork::mailbox(2);
  CHECK(is_atomic(crossingOnceTrace(), mb2));
  CHECK(is_atomic({send(0, 1, 0)}, mb2));
  CHECK(is_atomic({}, mb2));
  auto mb3 = ProcessNetwork::mailbox(3);
  CHECK(is_atomic(lateDeliveryTrace(), mb3));
  CHECK(is_atomic(echoRingTrace(), mb3));
  CHECK(is_atomic(delayedEchoTrace(), mb3));

  SUBCASE("atomic decompositions are singletons") {
    auto factors = decompose(lateDeliveryTrace(), mb3);
    REQUIRE(factors.size() == 1);
    CHECK(equivalent(factors[0].factor, lateDeliveryTrace()));
  }
}

TEST_CASE("recomposing the factors reproduces the trace up to equivalence") {
  auto mb = ProcessNetwork::mailbox(3);
  for (const Trace& t : {pendingPipelineTrace(), crossedPairTrailingTrace(), delayedEchoTrace()}) {
    Trace prod;
    for (const auto& f : decompose(t, mb)) {
      auto next = product(mb, prod, f.factor);
      REQUIRE(next.has_value());
      prod = *next;
    }
    CHECK(equivalent(prod, t));
  }
}

TEST_CASE("skeleton order equals condensation reachability over order arcs") {
  std::mt19937 rng(41);
  auto mb = ProcessNetwork::mailbox(3);
  for (int i = 0; i < 60; ++i) {
    Cfm cfm = randomSystem(rng, 3, 3, 2, 4);
    for (const Trace& t : traces_up_to(cfm, mb, 6, 100000)) {
      if (t.empty()) continue;
      auto groups = comm_sccs(t, mb);
      Skeleton sk = skeleton(t, mb);
      REQUIRE(sk.count == groups.size());
      // Oracle: reachability over process-order and buffer-order arcs
      // between components, computed from scratch.
      CommGraph g = comm_graph(t, mb);
      std::vector<std::size_t> groupOf(t.size());
      for (std::size_t gi = 0; gi < groups.size(); ++gi)
        for (std::size_t e : groups[gi]) groupOf[e] = gi;
      std::vector<std::vector<bool>> reach(sk.count, std::vector<bool>(sk.count, false));
      for (const auto& e : g.edges)
        if (e.kind != CommEdgeKind::Message && groupOf[e.from] != groupOf[e.to])
          reach[groupOf[e.from]][groupOf[e.to]] = true;
      for (std::size_t k = 0; k < sk.count; ++k)
        for (std::size_t a = 0; a < sk.count; ++a)
          for (std::size_t b = 0; b < sk.count; ++b)
            if (reach[a][k] && reach[k][b]) reach[a][b] = true;
      for (std::size_t a = 0; a < sk.count; ++a)
        for (std::size_t b = 0; b < sk.count; ++b)
          CHECK(sk.precedes(a + 1, b + 1) == reach[a][b]);
    }
  }
}

TEST_CASE("atomicity coincides with unsplittability") {
  // No equivalent rescheduling of an atomic trace splits into a defined
  // product of two non-empty parts, and vice versa.
  std::mt19937 rng(43);
  auto mb = ProcessNetwork::mailbox(3);
  int atomicSeen = 0, splitSeen = 0;
  for (int i = 0; i < 25; ++i) {
    Cfm cfm = randomSystem(rng, 3, 3, 2, 4);
    for (const Trace& t : traces_up_to(cfm, mb, 6, 100000)) {
      if (t.empty()) continue;
      bool splittable = false;
      for (const Trace& v : oracle::equivalent_reorderings(t)) {
        if (!is_viable(mb, v)) continue;
        for (std::size_t cut = 1; cut < v.size() && !splittable; ++cut) {
          Trace head(v.begin(), v.begin() + cut);
          Trace tail(v.begin() + cut, v.end());
          if (!is_viable(mb, head) || !is_viable(mb, tail)) continue;
          if (product(mb, head, tail).has_value()) splittable = true;
        }
        if (splittable) break;
      }
      CHECK(is_atomic(t, mb) == !splittable);
      (is_atomic(t, mb) ? atomicSeen : splitSeen)++;
    }
  }
  CHECK(atomicSeen > 20);
  CHECK(splitSeen > 20);
}

TEST_CASE("the fan-out sequence admits the wrap-around labeling") {
  MsSequence v = fanoutMs();
  auto wl = find_well_labeling(v, 2, 1);
  REQUIRE(wl.has_value());
  CHECK(wl->positions == std::vector<std::size_t>{2, 3, 0, 1});
  REQUIRE(wl->arcs.size() == 3);
  CHECK(wl->arcs[0] == ArcKind::Indirect);
  CHECK(wl->arcs[1] == ArcKind::Indirect);
  CHECK(wl->arcs[2] == ArcKind::Direct);

  SUBCASE("trivial labeling for equal endpoints") {
    auto self = find_well_labeling(v, 1, 1);
    REQUIRE(self.has_value());
    CHECK(self->size() == 1);
  }
}

namespace {

// All exchanges over a few processes/messages: choose sends, then which are
// received (receives in send order).
std::vector<Trace> smallExchanges(std::size_t procs, std::size_t msgs, std::size_t maxSends) {
  std::vector<Trace> out;
  std::vector<Action> sends;
  for (ProcessId a = 0; a < procs; ++a)
    for (ProcessId b = 0; b < procs; ++b)
      if (a != b)
        for (MessageId m = 0; m < msgs; ++m) sends.push_back(send(a, b, m));
  std::function<void(std::vector<Action>&)> rec = [&](std::vector<Action>& chosen) {
    if (!chosen.empty()) {
      // Every subset of matched sends that respects the mailbox discipline.
      std::size_t n = chosen.size();
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        // A matched send to q must not follow an unmatched one to q.
        std::vector<bool> sawUnmatched(procs, false);
        bool ok = true;
        Trace t;
        for (std::size_t i = 0; i < n && ok; ++i) {
          bool matched = (mask >> i) & 1;
          if (matched && sawUnmatched[chosen[i].peer]) ok = false;
          if (!matched) sawUnmatched[chosen[i].peer] = true;
          t.push_back(chosen[i]);
        }
        if (!ok) continue;
        for (std::size_t i = 0; i < n; ++i)
          if ((mask >> i) & 1)
            t.push_back(receive(chosen[i].peer, chosen[i].actor, chosen[i].message));
        out.push_back(std::move(t));
      }
    }
    if (chosen.size() == maxSends) return;
    for (const Action& s : sends) {
      chosen.push_back(s);
      rec(chosen);
      chosen.pop_back();
    }
  };
  std::vector<Action> chosen;
  rec(chosen);
  return out;
}

}  // namespace

TEST_CASE("labelings exist exactly when the communication graph has a path") {
  auto mb = ProcessNetwork::mailbox(3);
  std::size_t checked = 0;
  for (const Trace& ex : smallExchanges(3, 1, 3)) {
    if (!is_viable(mb, ex)) continue;
    MsSequence v = ms(ex);
    Msc chart = msc_of(ex);
    // Positions of the sends inside the full trace are 0..|v|-1.
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) {
        bool path = false;
        {
          CommGraph g = comm_graph(ex, mb);
          auto adj = g.adjacency();
          std::vector<bool> seen(g.eventCount, false);
          std::vector<std::size_t> todo{i};
          seen[i] = true;
          while (!todo.empty()) {
            std::size_t cur = todo.back();
            todo.pop_back();
            for (std::size_t nxt : adj[cur])
              if (!seen[nxt]) {
                seen[nxt] = true;
                todo.push_back(nxt);
              }
          }
          path = seen[j];
        }
        auto wl = find_well_labeling(v, i, j);
        CHECK(wl.has_value() == path);
        if (wl) {
          CHECK(wl->size() <= 3 * 3 + 3);
          // Each consecutive pair really is an arc.
          for (std::size_t k = 0; k + 1 < wl->positions.size(); ++k) {
            bool ok = direct_arc(v, wl->positions[k], wl->positions[k + 1]) ||
                      indirect_arc(v, wl->positions[k], wl->positions[k + 1]);
            CHECK(ok);
          }
        }
        ++checked;
      }
    }
    if (checked > 20000) break;
  }
  CHECK(checked > 1000);
}

TEST_CASE("minimal labelings respect the quadratic size bound") {
  std::mt19937 rng(47);
  auto mb = ProcessNetwork::mailbox(4);
  std::uniform_int_distribution<int> procDist(0, 3);
  std::uniform_int_distribution<int> lenDist(2, 7);
  int found = 0;
  for (int round = 0; round < 4000; ++round) {
    // Random exchange over up to 4 processes.
    std::size_t len = lenDist(rng);
    std::vector<Action> sends;
    for (std::size_t i = 0; i < len; ++i) {
      int a = procDist(rng), b = procDist(rng);
      if (a == b) continue;
      sends.push_back(send(static_cast<ProcessId>(a), static_cast<ProcessId>(b), 0));
    }
    if (sends.empty()) continue;
    std::uniform_int_distribution<std::uint32_t> maskDist(0, (1u << sends.size()) - 1);
    std::uint32_t mask = maskDist(rng);
    Trace t;
    std::vector<bool> sawUnmatched(4, false);
    bool ok = true;
    for (std::size_t i = 0; i < sends.size(); ++i) {
      bool matched = (mask >> i) & 1;
      if (matched && sawUnmatched[sends[i].peer]) ok = false;
      if (!matched) sawUnmatched[sends[i].peer] = true;
      t.push_back(sends[i]);
    }
    if (!ok) continue;
    for (std::size_t i = 0; i < sends.size(); ++i)
      if ((mask >> i) & 1)
        t.push_back(receive(sends[i].peer, sends[i].actor, sends[i].message));
    if (!is_viable(mb, t)) continue;
    MsSequence v = ms(t);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        if (auto wl = find_well_labeling(v, i, j)) {
          CHECK(wl->size() <= 4 * 4 + 4);
          ++found;
        }
  }
  CHECK(found > 500);
}
