#include <doctest.h>

#include <algorithm>
#include <deque>
#include <set>

#include "fixtures.hpp"
#include "mbx/oracle.hpp"

using namespace mbx;
using namespace fixtures;

namespace {

Trace randomViableTrace(std::mt19937& rng, const ProcessNetwork& net, std::size_t procs,
                        std::size_t msgs, std::size_t len) {
  Trace t;
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<std::size_t> procDist(0, procs - 1);
  std::uniform_int_distribution<std::size_t> msgDist(0, msgs - 1);
  while (t.size() < len) {
    if (coin(rng) != 0) {
      ProcessId from = static_cast<ProcessId>(procDist(rng));
      ProcessId to = static_cast<ProcessId>(procDist(rng));
      if (from == to) continue;
      t.push_back(send(from, to, static_cast<MessageId>(msgDist(rng))));
    } else {
      // Receive whatever is at the head of a random buffer.
      std::vector<std::deque<Action>> byBuffer(net.bufferCount());
      for (const Action& a : t) {
        if (a.isSend())
          byBuffer[net.buffer(a)].push_back(a);
        else {
          byBuffer[net.buffer(a)].pop_front();
        }
      }
      std::vector<Action> options;
      for (const auto& buf : byBuffer)
        if (!buf.empty())
          options.push_back(
              receive(buf.front().peer, buf.front().actor, buf.front().message));
      if (options.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      t.push_back(options[pick(rng)]);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("single send is enabled and appends to the target buffer") {
  Cfm cfm = pendingPipelineSystem();
  auto mb = ProcessNetwork::mailbox(3);
  Configuration c0 = initial_configuration(cfm, mb);
  Action a = pendingPipelineTrace()[0];  // p1!p2(m1)
  auto c1 = step(cfm, mb, c0, a);
  REQUIRE(c1.has_value());
  BufferId b = mb.buffer(a);
  REQUIRE(c1->buffers[b].size() == 1);
  CHECK(c1->buffers[b][0] == BufferItem{0, 1, a.message});
}

TEST_CASE("mailbox receive blocks when another sender's message heads the buffer") {
  // Two sends into the same mailbox; the later one cannot be taken first.
  Cfm cfm = straightLine("head_mismatch", 3,
                         {send(0, 1, 0), send(2, 1, 1), receive(1, 2, 1), receive(1, 0, 0)});
  auto mb = ProcessNetwork::mailbox(3);
  auto p2p = ProcessNetwork::p2p(3);
  Trace sends = {send(0, 1, 0), send(2, 1, 1)};
  Action rcv21 = receive(1, 2, 1);

  auto afterMb = run(cfm, mb, sends);
  REQUIRE(afterMb.ok());
  CHECK_FALSE(step(cfm, mb, *afterMb.finalConfig, rcv21).has_value());

  auto afterP2p = run(cfm, p2p, sends);
  REQUIRE(afterP2p.ok());
  auto done = step(cfm, p2p, *afterP2p.finalConfig, rcv21);
  REQUIRE(done.has_value());
  CHECK(done->buffers[p2p.buffer(2, 1)].empty());
}

TEST_CASE("running the pipeline scenario leaves exactly the pending send buffered") {
  Cfm cfm = pendingPipelineSystem();
  auto mb = ProcessNetwork::mailbox(3);
  auto res = run(cfm, mb, pendingPipelineTrace());
  REQUIRE(res.ok());
  const Configuration& c = *res.finalConfig;
  BufferId p2box = mb.buffer(2, 1);
  REQUIRE(c.buffers[p2box].size() == 1);
  CHECK(c.buffers[p2box][0] == BufferItem{2, 1, cfm.messageByName("m3").value()});

  SUBCASE("empty trace ends in the initial configuration") {
    auto empty = run(cfm, mb, {});
    REQUIRE(empty.ok());
    CHECK(*empty.finalConfig == initial_configuration(cfm, mb));
  }

  SUBCASE("pushing the first send late blocks at the final receive") {
    Trace t = pendingPipelineTrace();
    // Same projections, but the pending send now heads the mailbox.
    Trace bad = {t[1], t[2], t[3], t[0], t[4]};
    auto res2 = run(cfm, mb, bad);
    REQUIRE_FALSE(res2.ok());
    CHECK(res2.failedIndex == 4);
  }
}

TEST_CASE("viability distinguishes the two built-in networks") {
  Trace t = {send(0, 1, 0), send(2, 1, 1), receive(1, 2, 1)};
  CHECK(is_viable(ProcessNetwork::p2p(3), t));
  CHECK_FALSE(is_viable(ProcessNetwork::mailbox(3), t));
  CHECK(is_viable(ProcessNetwork::p2p(3), {}));
  CHECK(is_viable(ProcessNetwork::mailbox(3), {}));
}

TEST_CASE("mailbox viability implies peer-to-peer viability") {
  std::mt19937 rng(7);
  auto mb = ProcessNetwork::mailbox(3);
  auto p2p = ProcessNetwork::p2p(3);
  int viableCount = 0;
  for (int i = 0; i < 1000; ++i) {
    Trace t = randomViableTrace(rng, mb, 3, 2, 6);
    if (!is_viable(mb, t)) continue;
    ++viableCount;
    CHECK(is_viable(p2p, t));
  }
  CHECK(viableCount > 100);
}

TEST_CASE("trace enumeration is exact and prefix closed") {
  SUBCASE("bound zero yields only the empty trace") {
    Cfm cfm = pendingPipelineSystem();
    auto traces = traces_up_to(cfm, ProcessNetwork::mailbox(3), 0);
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].empty());
  }
  SUBCASE("a send self-loop yields one trace per length") {
    Cfm cfm;
    cfm.addProcess("a");
    cfm.addProcess("b");
    cfm.internMessage("m");
    cfm.internState(0, "s");
    cfm.internState(1, "s");
    cfm.processes[0].transitions.push_back({0, send(0, 1, 0), 0});
    auto traces = traces_up_to(cfm, ProcessNetwork::mailbox(2), 2);
    CHECK(traces.size() == 3);  // empty, s, ss
  }
  SUBCASE("prefixes of every enumerated trace are enumerated") {
    Cfm cfm = crossingOnceSystem();
    auto traces = traces_up_to(cfm, ProcessNetwork::mailbox(2), 4);
    std::set<Trace> all(traces.begin(), traces.end());
    for (const Trace& t : traces)
      for (std::size_t cut = 0; cut < t.size(); ++cut)
        CHECK(all.count(Trace(t.begin(), t.begin() + cut)) == 1);
  }
  SUBCASE("the two-automata ring admits the one-message round trip") {
    std::vector<TextNfa> nfas = {singleStateAutomaton("a"), singleStateAutomaton("a")};
    Cfm ring = gen_benchmark(nfas, Gadget::None);
    auto traces = traces_up_to(ring, ProcessNetwork::mailbox(ring.processCount()), 2);
    MessageId a = ring.messageByName("a").value();
    Trace want = {send(0, 1, a), receive(1, 0, a)};
    CHECK(std::find(traces.begin(), traces.end(), want) != traces.end());
  }
}

TEST_CASE("projection extracts one process's actions in order") {
  CHECK(projection({}, 0).empty());
  Trace t = pendingPipelineTrace();
  Trace p3 = projection(t, 2);
  REQUIRE(p3.size() == 2);
  CHECK(p3[0] == t[2]);
  CHECK(p3[1] == t[3]);
}

TEST_CASE("projections are invariant across equivalent linearizations") {
  Trace t = pendingPipelineTrace();
  Msc chart = msc_of(t);
  for (const Trace& lin : linearizations(chart, ProcessNetwork::mailbox(3))) {
    for (ProcessId p = 0; p < 3; ++p) CHECK(projection(lin, p) == projection(t, p));
  }
}

TEST_CASE("a sequence runs iff it is viable and every process recognizes its projection") {
  std::mt19937 rng(11);
  Cfm cfm = delayedEchoSystem();
  auto mb = ProcessNetwork::mailbox(3);
  for (int i = 0; i < 500; ++i) {
    Trace t = randomViableTrace(rng, mb, 3, static_cast<std::size_t>(cfm.messageCount()), 5);
    bool viable = is_viable(mb, t);
    bool recognized = true;
    std::vector<std::size_t> pos(3, 0);
    std::vector<LocalState> at;
    for (const auto& p : cfm.processes) at.push_back(p.initial);
    for (const Action& a : t) {
      bool stepped = false;
      for (const auto& tr : cfm.processes[a.actor].transitions) {
        if (tr.from == at[a.actor] && tr.action == a) {
          at[a.actor] = tr.to;
          stepped = true;
          break;
        }
      }
      if (!stepped) recognized = false;
    }
    CHECK(run(cfm, mb, t).ok() == (viable && recognized));
  }
}
