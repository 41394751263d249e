#include "fixtures.hpp"

namespace fixtures {

Cfm straightLine(const std::string& name, std::size_t processCount, const Trace& scenario) {
  Cfm cfm;
  cfm.name = name;
  for (std::size_t p = 0; p < processCount; ++p) cfm.addProcess("p" + std::to_string(p + 1));
  MessageId maxMsg = 0;
  for (const Action& a : scenario) maxMsg = std::max(maxMsg, a.message);
  if (!scenario.empty())
    while (cfm.messageNames.size() <= maxMsg)
      cfm.internMessage("m" + std::to_string(cfm.messageNames.size() + 1));
  std::vector<std::size_t> depth(processCount, 0);
  for (std::size_t p = 0; p < processCount; ++p)
    cfm.internState(static_cast<ProcessId>(p), "s0");
  for (const Action& a : scenario) {
    ProcessId p = a.actor;
    LocalState from = *cfm.stateByName(p, "s" + std::to_string(depth[p]));
    LocalState to = cfm.internState(p, "s" + std::to_string(depth[p] + 1));
    cfm.processes[p].transitions.push_back({from, a, to});
    ++depth[p];
  }
  cfm.validate();
  return cfm;
}

namespace {

// Builds actions against a fixed interning: processes p1..pn as 0..n-1 and
// the messages named on first use.
struct Scenario {
  Cfm skeleton;
  explicit Scenario(std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) skeleton.addProcess("p" + std::to_string(p + 1));
  }
  Action snd(ProcessId from, ProcessId to, const std::string& m) {
    return send(from, to, skeleton.internMessage(m));
  }
  Action rcv(ProcessId by, ProcessId from, const std::string& m) {
    return receive(by, from, skeleton.internMessage(m));
  }
};

Cfm withMessages(const std::string& name, std::size_t n, const Scenario& sc, const Trace& t) {
  Cfm cfm = straightLine(name, n, t);
  cfm.messageNames = sc.skeleton.messageNames;
  cfm.validate();
  return cfm;
}

}  // namespace

namespace {

Trace buildPendingPipeline(Scenario& sc) {
  return {sc.snd(0, 1, "m1"), sc.snd(1, 2, "m2"), sc.rcv(2, 1, "m2"), sc.snd(2, 1, "m3"),
          sc.rcv(1, 0, "m1")};
}

Trace buildLateDelivery(Scenario& sc) {
  return {sc.snd(0, 2, "a"), sc.snd(1, 0, "b"), sc.rcv(0, 1, "b"), sc.snd(0, 1, "c"),
          sc.rcv(1, 0, "c"), sc.snd(2, 1, "d"), sc.rcv(2, 0, "a")};
}

Trace buildOvertakenRelay(Scenario& sc) {
  return {sc.snd(0, 2, "t"), sc.snd(1, 0, "t"), sc.rcv(0, 1, "t"), sc.snd(0, 1, "t"),
          sc.rcv(1, 0, "t"), sc.snd(1, 2, "t"), sc.rcv(2, 1, "t")};
}

Trace buildDelayedEcho(Scenario& sc) {
  return {sc.snd(1, 0, "m1"), sc.snd(0, 1, "m2"), sc.rcv(1, 0, "m2"), sc.snd(1, 2, "m3"),
          sc.rcv(2, 1, "m3"), sc.snd(0, 2, "m4"), sc.rcv(2, 0, "m4"), sc.rcv(0, 1, "m1")};
}

Trace buildEchoRing(Scenario& sc) {
  return {sc.snd(1, 0, "m2"), sc.snd(1, 2, "m3"), sc.rcv(2, 1, "m3"), sc.snd(2, 1, "m4"),
          sc.rcv(1, 2, "m4"), sc.snd(0, 1, "m1"), sc.rcv(0, 1, "m2")};
}

Trace buildCrossingOnce(Scenario& sc) {
  return {sc.snd(0, 1, "a"), sc.snd(1, 0, "b"), sc.rcv(1, 0, "a"), sc.rcv(0, 1, "b")};
}

}  // namespace

Trace pendingPipelineTrace() {
  Scenario sc(3);
  return buildPendingPipeline(sc);
}

Cfm pendingPipelineSystem() {
  Scenario sc(3);
  Trace t = buildPendingPipeline(sc);
  return withMessages("pending_pipeline", 3, sc, t);
}

Trace lateDeliveryTrace() {
  Scenario sc(3);
  return buildLateDelivery(sc);
}

Cfm lateDeliverySystem() {
  Scenario sc(3);
  Trace t = buildLateDelivery(sc);
  return withMessages("late_delivery", 3, sc, t);
}

Trace overtakenRelayTrace() {
  Scenario sc(3);
  return buildOvertakenRelay(sc);
}

Cfm overtakenRelaySystem() {
  Scenario sc(3);
  Trace t = buildOvertakenRelay(sc);
  return withMessages("overtaken_relay", 3, sc, t);
}

Trace delayedEchoTrace() {
  Scenario sc(3);
  return buildDelayedEcho(sc);
}

Cfm delayedEchoSystem() {
  Scenario sc(3);
  Trace t = buildDelayedEcho(sc);
  return withMessages("delayed_echo", 3, sc, t);
}

Trace echoRingTrace() {
  Scenario sc(3);
  return buildEchoRing(sc);
}

Cfm echoRingSystem() {
  Scenario sc(3);
  Trace t = buildEchoRing(sc);
  return withMessages("echo_ring", 3, sc, t);
}

Trace crossedPairTrailingTrace() {
  Scenario sc(3);
  return {sc.snd(1, 0, "m1"), sc.snd(0, 1, "m2"), sc.rcv(0, 1, "m1"), sc.rcv(1, 0, "m2"),
          sc.snd(2, 1, "m3")};
}

Trace crossingOnceTrace() {
  Scenario sc(2);
  return buildCrossingOnce(sc);
}

Cfm crossingOnceSystem() {
  Scenario sc(2);
  Trace t = buildCrossingOnce(sc);
  return withMessages("crossing_once", 2, sc, t);
}

Cfm crossingLoopSystem() {
  Cfm cfm;
  cfm.name = "crossing_loop";
  ProcessId p = cfm.addProcess("p1");
  ProcessId q = cfm.addProcess("p2");
  MessageId a = cfm.internMessage("a");
  MessageId b = cfm.internMessage("b");
  LocalState ps = cfm.internState(p, "s0");
  LocalState qs = cfm.internState(q, "s0");
  cfm.processes[p].transitions.push_back({ps, send(p, q, a), ps});
  cfm.processes[p].transitions.push_back({ps, receive(p, q, b), ps});
  cfm.processes[q].transitions.push_back({qs, send(q, p, b), qs});
  cfm.processes[q].transitions.push_back({qs, receive(q, p, a), qs});
  cfm.validate();
  return cfm;
}

MsSequence fanoutMs() {
  Scenario sc(3);
  MsSequence v;
  v.push_back({sc.snd(1, 2, "m2"), false});
  v.push_back({sc.snd(1, 0, "m1"), false});
  v.push_back({sc.snd(1, 0, "m4"), true});
  v.push_back({sc.snd(2, 1, "m3"), false});
  return v;
}

Trace forkJoinPrefix() {
  Scenario sc(4);
  return {sc.snd(2, 1, "m1"), sc.snd(0, 2, "m2"), sc.rcv(2, 0, "m2"), sc.snd(2, 3, "m3"),
          sc.rcv(3, 2, "m3"), sc.snd(0, 1, "m4"), sc.snd(1, 3, "m5")};
}

Action forkJoinReceive() {
  Scenario sc(4);
  for (const char* m : {"m1", "m2", "m3", "m4", "m5"}) sc.skeleton.internMessage(m);
  return sc.rcv(1, 0, "m4");
}

Trace forkJoinReversedPrefix() {
  Scenario sc(4);
  return {sc.snd(2, 1, "m1"), sc.snd(2, 0, "m2"), sc.rcv(0, 2, "m2"), sc.snd(2, 3, "m3"),
          sc.rcv(3, 2, "m3"), sc.snd(0, 1, "m4"), sc.snd(1, 3, "m5")};
}

Action forkJoinReversedReceive() {
  Scenario sc(4);
  for (const char* m : {"m1", "m2", "m3", "m4", "m5"}) sc.skeleton.internMessage(m);
  return sc.rcv(1, 0, "m4");
}

TextNfa letterAutomaton(const std::string& name, std::size_t chainLength,
                        const std::vector<std::string>& letters, bool loop) {
  TextNfa out;
  out.name = name;
  for (std::size_t i = 0; i <= chainLength; ++i) out.states.push_back("q" + std::to_string(i));
  out.initial = 0;
  out.finals = {static_cast<std::uint32_t>(loop ? 0 : chainLength)};
  for (std::size_t i = 0; i < chainLength; ++i) {
    std::uint32_t to = static_cast<std::uint32_t>(i + 1);
    if (loop && i + 1 == chainLength) to = 0;
    out.transitions.push_back({static_cast<std::uint32_t>(i), to, letters[i % letters.size()]});
  }
  if (loop) out.states.pop_back();
  return out;
}

TextNfa singleStateAutomaton(const std::string& letter) {
  TextNfa out;
  out.name = "single";
  out.states = {"q0"};
  out.initial = 0;
  out.finals = {0};
  out.transitions.push_back({0, 0, letter});
  return out;
}

Cfm randomSystem(std::mt19937& rng, std::size_t processes, std::size_t statesPerProcess,
                 std::size_t messages, std::size_t transitionsPerProcess) {
  Cfm cfm;
  cfm.name = "random";
  for (std::size_t p = 0; p < processes; ++p) cfm.addProcess("p" + std::to_string(p + 1));
  for (std::size_t m = 0; m < messages; ++m) cfm.internMessage("m" + std::to_string(m + 1));
  std::uniform_int_distribution<std::size_t> stateDist(0, statesPerProcess - 1);
  std::uniform_int_distribution<std::size_t> msgDist(0, messages - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t p = 0; p < processes; ++p) {
    for (std::size_t s = 0; s < statesPerProcess; ++s)
      cfm.internState(static_cast<ProcessId>(p), "s" + std::to_string(s));
    for (std::size_t t = 0; t < transitionsPerProcess; ++t) {
      LocalState from = static_cast<LocalState>(stateDist(rng));
      LocalState to = static_cast<LocalState>(stateDist(rng));
      std::uniform_int_distribution<std::size_t> peerDist(0, processes - 2);
      std::size_t peerRaw = peerDist(rng);
      ProcessId peer = static_cast<ProcessId>(peerRaw >= p ? peerRaw + 1 : peerRaw);
      MessageId m = static_cast<MessageId>(msgDist(rng));
      Action a = coin(rng) ? send(static_cast<ProcessId>(p), peer, m)
                           : receive(static_cast<ProcessId>(p), peer, m);
      cfm.processes[p].transitions.push_back({from, a, to});
    }
  }
  cfm.validate();
  return cfm;
}

}  // namespace fixtures
