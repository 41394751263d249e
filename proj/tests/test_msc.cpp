#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "mbx/oracle.hpp"

using namespace mbx;
using namespace fixtures;

TEST_CASE("charts match messages per channel and keep pending sends unmatched") {
  Trace t = pendingPipelineTrace();
  Msc m = msc_of(t);
  CHECK(m.isMatchedSend(0));   // m1
  CHECK(m.isMatchedSend(1));   // m2
  CHECK(m.matchedReceive[0] == 4);
  CHECK(m.matchedReceive[1] == 2);
  CHECK(m.isUnmatchedSend(3));  // m3 stays pending

  Msc single = msc_of({send(0, 1, 0)});
  CHECK(single.size() == 1);
  CHECK(single.isUnmatchedSend(0));

  CHECK_THROWS_AS(msc_of({receive(1, 0, 0)}), Error);
}

TEST_CASE("validity is cycle freedom of order plus buffer constraints") {
  auto mb = ProcessNetwork::mailbox(3);
  CHECK(is_valid(msc_of(pendingPipelineTrace()), mb));
  // The overtaken relay closes a cycle through the mailbox order.
  CHECK_FALSE(is_valid(msc_of(overtakenRelayTrace()), mb));
  CHECK(is_valid(msc_of(overtakenRelayTrace()), ProcessNetwork::p2p(3)));

  SUBCASE("charts of mailbox-viable traces are always mailbox-valid") {
    for (const Trace& t : {pendingPipelineTrace(), lateDeliveryTrace(), echoRingTrace(),
                           delayedEchoTrace(), crossingOnceTrace()}) {
      REQUIRE(is_viable(mb, t));
      CHECK(is_valid(msc_of(t), mb));
    }
  }
}

TEST_CASE("equivalence is projection equality") {
  Trace u = pendingPipelineTrace();
  CHECK(equivalent(u, u));

  // Same chart, different viability.
  Trace left = {send(0, 1, 0), send(2, 1, 0), receive(1, 0, 0)};
  Trace right = {send(2, 1, 0), send(0, 1, 0), receive(1, 0, 0)};
  CHECK(equivalent(left, right));
  CHECK(is_viable(ProcessNetwork::mailbox(3), left));
  CHECK_FALSE(is_viable(ProcessNetwork::mailbox(3), right));

  // The pipeline scenario against its round-shaped rescheduling.
  Trace v = {u[1], u[2], u[3], u[0], u[4]};
  CHECK(equivalent(u, v));
}

TEST_CASE("linearizations of a valid chart are exactly the viable shuffles") {
  auto mb = ProcessNetwork::mailbox(3);
  CHECK(linearizations(msc_of({send(0, 1, 0)}), mb).size() == 1);

  Trace t = pendingPipelineTrace();
  auto lins = linearizations(msc_of(t), mb);
  CHECK(!lins.empty());
  for (const Trace& lin : lins) {
    CHECK(is_viable(mb, lin));
    CHECK(equivalent(lin, t));
  }

  SUBCASE("count matches the brute-force permutation filter") {
    // All mailbox-viable interleavings with the same projections.
    std::size_t brute = 0;
    for (const Trace& r : oracle::equivalent_reorderings(t))
      if (is_viable(mb, r)) ++brute;
    CHECK(lins.size() == brute);
  }
}

TEST_CASE("marking annotates exactly the pending sends") {
  Trace t = {send(0, 1, 0), send(0, 2, 1), receive(2, 0, 1)};
  MarkedTrace marked = mark(t);
  REQUIRE(marked.size() == 3);
  CHECK(marked[0].unmatched);
  CHECK_FALSE(marked[1].unmatched);
  CHECK_FALSE(marked[2].unmatched);
  MsSequence m = ms(t);
  REQUIRE(m.size() == 2);
  CHECK(m[0].unmatched);
  CHECK_FALSE(m[1].unmatched);

  SUBCASE("fully matched traces carry no annotations") {
    for (const MarkedAction& a : mark(crossingOnceTrace())) CHECK_FALSE(a.unmatched);
  }
  SUBCASE("the send projection keeps every send") {
    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
      Cfm cfm = randomSystem(rng, 3, 3, 2, 4);
      for (const Trace& tr : traces_up_to(cfm, ProcessNetwork::mailbox(3), 5, 200000)) {
        std::size_t sends = 0;
        for (const Action& a : tr) sends += a.isSend();
        CHECK(ms(tr).size() == sends);
      }
    }
  }
}

TEST_CASE("the partial product forbids receiving from a blocked buffer") {
  auto mb = ProcessNetwork::mailbox(3);
  Trace v = pendingPipelineTrace();
  auto r = product(mb, {}, v);
  REQUIRE(r.has_value());
  CHECK(*r == v);

  Trace pending = {send(0, 1, 0)};                  // unmatched into p2's mailbox
  Trace receiveFromIt = {send(2, 1, 0), receive(1, 2, 0)};
  CHECK_FALSE(product(mb, pending, receiveFromIt).has_value());

  SUBCASE("associativity and dropping middles on random triples") {
    std::mt19937 rng(17);
    Cfm cfm = delayedEchoSystem();
    auto traces = traces_up_to(cfm, mb, 4, 100000);
    std::uniform_int_distribution<std::size_t> pick(0, traces.size() - 1);
    for (int i = 0; i < 300; ++i) {
      const Trace& a = traces[pick(rng)];
      const Trace& b = traces[pick(rng)];
      const Trace& c = traces[pick(rng)];
      auto ab = product(mb, a, b);
      auto bc = product(mb, b, c);
      std::optional<Trace> left, right;
      if (ab) left = product(mb, *ab, c);
      if (bc) right = product(mb, a, *bc);
      CHECK(left.has_value() == right.has_value());
      if (left && right) CHECK(*left == *right);
      if (left) {
        auto ac = product(mb, a, c);  // dropping the middle keeps definedness
        CHECK(ac.has_value());
      }
    }
  }
}

TEST_CASE("exchange shape and round structure") {
  auto mb = ProcessNetwork::mailbox(3);
  CHECK(is_exchange(mb, {}));
  CHECK(is_synchronous(mb, {}));

  Trace t = pendingPipelineTrace();
  CHECK_FALSE(is_exchange(mb, t));    // a send follows a receive
  CHECK_FALSE(is_synchronous(mb, t)); // the blocks overlap buffers
  CHECK(oracle::is_synchronizable_bf(t));

  CHECK_FALSE(oracle::is_synchronizable_bf(lateDeliveryTrace()));

  SUBCASE("the greedy cut agrees with exhaustive factorization") {
    std::mt19937 rng(23);
    for (int i = 0; i < 40; ++i) {
      Cfm cfm = randomSystem(rng, 3, 3, 2, 4);
      for (const Trace& tr : traces_up_to(cfm, mb, 6, 200000)) {
        CHECK(is_synchronous(mb, tr) == oracle::is_synchronous_exhaustive(mb, tr));
      }
    }
  }
}

TEST_CASE("normalizing an exchange orders receives like their sends") {
  Trace ex = {send(0, 1, 0), send(2, 1, 1), receive(1, 0, 0), receive(1, 2, 1)};
  CHECK(normalize_exchange(ex) == ex);

  // Receives flipped: not mailbox-viable, but its normalization is.
  Trace flipped = {send(0, 1, 0), send(2, 1, 1), receive(1, 2, 1), receive(1, 0, 0)};
  auto mb = ProcessNetwork::mailbox(3);
  CHECK_FALSE(is_viable(mb, flipped));
  CHECK_THROWS_AS(normalize_exchange(flipped), Error);
  Trace fixedUp = normalize_exchange(ex);
  CHECK(is_viable(mb, fixedUp));

  SUBCASE("equal send projections of exchanges imply chart equality") {
    std::mt19937 rng(31);
    Cfm cfm = delayedEchoSystem();
    auto traces = traces_up_to(cfm, mb, 6, 300000);
    std::vector<Trace> exchanges;
    for (const Trace& tr : traces)
      if (!tr.empty() && is_exchange(mb, tr)) exchanges.push_back(tr);
    for (const Trace& a : exchanges)
      for (const Trace& b : exchanges)
        if (ms(a) == ms(b)) CHECK(equivalent(a, b));
  }
  SUBCASE("normalization preserves the chart") {
    Trace ex2 = {send(0, 1, 0), send(0, 2, 1), receive(2, 0, 1), receive(1, 0, 0)};
    Trace norm = normalize_exchange(ex2);
    CHECK(is_viable(ProcessNetwork::mailbox(3), norm));
    CHECK(equivalent(norm, ex2));
  }
}
