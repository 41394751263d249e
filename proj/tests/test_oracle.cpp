#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "fixtures.hpp"
#include "mbx/oracle.hpp"

using namespace mbx;
using namespace fixtures;

TEST_CASE("path existence over order and buffer constraints") {
  auto mb = ProcessNetwork::mailbox(3);
  Msc chart = msc_of(overtakenRelayTrace());
  CHECK(oracle::path_exists(chart, mb, 0, 0));
  // The relay cycle: the opening pending send reaches the closing send, and
  // the buffer order points back.
  CHECK(oracle::path_exists(chart, mb, 0, 5));
  CHECK(oracle::path_exists(chart, mb, 5, 0));
  CHECK_FALSE(oracle::path_exists(msc_of(crossedPairTrailingTrace()), mb, 4, 0));
}

TEST_CASE("brute-force schedulability matches exhaustive rescheduling search") {
  CHECK(oracle::is_synchronizable_bf({}));
  CHECK(oracle::is_synchronizable_bf(pendingPipelineTrace()));
  CHECK_FALSE(oracle::is_synchronizable_bf(lateDeliveryTrace()));
  CHECK_FALSE(oracle::is_synchronizable_bf(echoRingTrace()));
  CHECK_FALSE(oracle::is_synchronizable_bf(delayedEchoTrace()));
  CHECK(oracle::is_synchronizable_bf(crossingOnceTrace()));

  std::mt19937 rng(51);
  auto mb = ProcessNetwork::mailbox(3);
  int agree = 0;
  for (int i = 0; i < 30; ++i) {
    Cfm cfm = randomSystem(rng, 3, 3, 2, 4);
    for (const Trace& t : traces_up_to(cfm, mb, 6, 100000)) {
      CHECK(oracle::is_synchronizable_bf(t) == oracle::is_synchronizable_exhaustive(t));
      ++agree;
    }
  }
  CHECK(agree > 500);
}

TEST_CASE("per-trace minimal round sizes") {
  CHECK(oracle::min_k_bf(pendingPipelineTrace()) == 1);
  CHECK(oracle::min_k_bf(crossingOnceTrace()) == 2);
  CHECK(oracle::min_k_bf(lateDeliveryTrace()) == UINT64_MAX);
  CHECK(oracle::min_k_bf({}) == 0);
}

TEST_CASE("mailbox reschedulability of p2p traces") {
  CHECK(oracle::is_mbsim_bf(pendingPipelineTrace()));
  CHECK_FALSE(oracle::is_mbsim_bf(overtakenRelayTrace()));

  SUBCASE("agreement with explicit search for a viable rescheduling") {
    std::mt19937 rng(53);
    auto mb = ProcessNetwork::mailbox(3);
    auto p2p = ProcessNetwork::p2p(3);
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
      Cfm cfm = randomSystem(rng, 3, 3, 2, 4);
      for (const Trace& t : traces_up_to(cfm, p2p, 6, 100000)) {
        bool direct = false;
        for (const Trace& v : oracle::equivalent_reorderings(t))
          direct = direct || is_viable(mb, v);
        CHECK(oracle::is_mbsim_bf(t) == direct);
        ++checked;
      }
    }
    CHECK(checked > 500);
  }
}

TEST_CASE("appending a receive stays reschedulable iff no pending send reaches the match") {
  SUBCASE("no pending send to the receiver at all") {
    Trace u = {send(0, 1, 0)};
    CHECK(oracle::append_receive_viable(u, receive(1, 0, 0)));
  }
  SUBCASE("the fork-join scenario tolerates the receive") {
    CHECK(oracle::append_receive_viable(forkJoinPrefix(), forkJoinReceive()));
  }
  SUBCASE("reversing the detour breaks it") {
    CHECK_FALSE(
        oracle::append_receive_viable(forkJoinReversedPrefix(), forkJoinReversedReceive()));
  }
  SUBCASE("agreement with the definitional rescheduling check") {
    std::mt19937 rng(59);
    auto mb = ProcessNetwork::mailbox(3);
    auto p2p = ProcessNetwork::p2p(3);
    int checked = 0;
    for (int i = 0; i < 25; ++i) {
      Cfm cfm = randomSystem(rng, 3, 3, 2, 4);
      for (const Trace& t : traces_up_to(cfm, mb, 6, 100000)) {
        // Try every receive that keeps the extension p2p-viable.
        for (ProcessId q = 0; q < 3; ++q) {
          for (ProcessId p = 0; p < 3; ++p) {
            if (p == q) continue;
            for (MessageId m = 0; m < cfm.messageCount(); ++m) {
              Action r = receive(q, p, m);
              Trace ur = t;
              ur.push_back(r);
              if (!is_viable(p2p, ur)) continue;
              bool criterion = oracle::append_receive_viable(t, r);
              bool definitional = oracle::is_mbsim_bf(ur);
              CHECK(criterion == definitional);
              ++checked;
            }
          }
        }
      }
    }
    CHECK(checked > 300);
  }
}

TEST_CASE("exhaustive verdicts cover both semantics and stay consistent") {
  SUBCASE("an actionless system has only the empty trace") {
    Cfm cfm;
    cfm.addProcess("a");
    cfm.addProcess("b");
    cfm.internState(0, "s");
    cfm.internState(1, "s");
    auto report = oracle::exhaustive_verdicts(cfm, 4);
    CHECK(report.mb.size() == 1);
    CHECK(report.allSynchronizable);
    CHECK(report.maxMinK == 0);
  }
  SUBCASE("the two-automata ring is schedulable with single-send rounds") {
    Cfm ring = gen_benchmark({singleStateAutomaton("a"), singleStateAutomaton("a")}, Gadget::None);
    auto report = oracle::exhaustive_verdicts(ring, 6);
    CHECK(report.allSynchronizable);
    CHECK(report.maxMinK == 1);
  }
  SUBCASE("prefix closure of the recorded traces") {
    auto report = oracle::exhaustive_verdicts(pendingPipelineSystem(), 5);
    std::set<Trace> all;
    for (const auto& rec : report.mb) all.insert(rec.trace);
    for (const auto& rec : report.mb)
      for (std::size_t cut = 0; cut < rec.trace.size(); ++cut)
        CHECK(all.count(Trace(rec.trace.begin(), rec.trace.begin() + cut)) == 1);
  }
}
