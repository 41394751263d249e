#include <doctest.h>

#include <algorithm>
#include <memory>

#include "fixtures.hpp"

using namespace mbx;
using namespace fixtures;

namespace {

// a/b alphabet encoded as two send actions.
Letter la() { return sendLetter(send(0, 1, 0)); }
Letter lb() { return sendLetter(send(0, 1, 1)); }

std::shared_ptr<ExplicitNfa> evenAs() {
  auto nfa = std::make_shared<ExplicitNfa>();
  nfa->letters = {la(), lb()};
  nfa->addState(true, "even");
  nfa->addState(false, "odd");
  nfa->initialStates = {0};
  nfa->addTransition(0, la(), 1);
  nfa->addTransition(1, la(), 0);
  nfa->addTransition(0, lb(), 0);
  nfa->addTransition(1, lb(), 1);
  return nfa;
}

}  // namespace

TEST_CASE("shortest accepted word is breadth minimal") {
  auto nfa = evenAs();
  nfa->acceptingStates = {false, true};  // odd number of a's
  Budget budget(100000);
  auto w = shortest_accepted(*nfa, budget);
  REQUIRE(w.has_value());
  CHECK(w->size() == 1);
  CHECK((*w)[0] == la());

  SUBCASE("empty language") {
    nfa->acceptingStates = {false, false};
    Budget b2(1000);
    CHECK_FALSE(shortest_accepted(*nfa, b2).has_value());
  }
  SUBCASE("minimality against enumeration") {
    Budget b3(100000);
    auto words = accepted_words_up_to(*nfa, 3, b3);
    REQUIRE(!words.empty());
    std::size_t minLen = SIZE_MAX;
    for (const auto& x : words) minLen = std::min(minLen, x.size());
    Budget b4(100000);
    CHECK(shortest_accepted(*nfa, b4)->size() == minLen);
  }
}

TEST_CASE("membership follows subset simulation") {
  auto nfa = evenAs();
  Word empty;
  CHECK(member(*nfa, empty));
  Word onea = {la()};
  CHECK_FALSE(member(*nfa, onea));
  Word ab2 = {la(), lb(), la()};
  CHECK(member(*nfa, ab2));
}

TEST_CASE("complementation flips membership and is involutive on samples") {
  auto nfa = evenAs();
  ComplementNfa co(nfa);
  auto coPtr = std::make_shared<ComplementNfa>(nfa);
  ComplementNfa coco(coPtr);
  std::vector<Word> samples = {{}, {la()}, {lb()}, {la(), la()}, {la(), lb(), la()},
                               {lb(), lb(), la(), la()}};
  for (const Word& w : samples) {
    CHECK(member(co, w) == !member(*nfa, w));
    CHECK(member(coco, w) == member(*nfa, w));
  }
  SUBCASE("complement of the empty language accepts the empty word") {
    auto dead = std::make_shared<ExplicitNfa>();
    dead->letters = {la()};
    dead->addState(false);
    dead->initialStates = {0};
    ComplementNfa codead(dead);
    Word empty;
    CHECK(member(codead, empty));
  }
}

TEST_CASE("determinization and minimization preserve the language") {
  auto nfa = evenAs();
  ExplicitNfa det = determinize(*nfa);
  ExplicitNfa min = minimal_dfa(det);
  CHECK(min.stateCount() <= det.stateCount());
  Budget budget(100000);
  for (const Word& w : accepted_words_up_to(*nfa, 4, budget)) CHECK(member(min, w));
  Budget b2(100000);
  for (const Word& w : accepted_words_up_to(min, 4, b2)) CHECK(member(*nfa, w));
}

TEST_CASE("receive commutation check on handcrafted automata") {
  Letter r1 = receiveLetter(receive(0, 2, 0));  // two receives by distinct processes
  Letter r2 = receiveLetter(receive(1, 2, 0));

  SUBCASE("no receive transitions at all") {
    auto nfa = evenAs();
    Budget budget(10000);
    CHECK(check_r_diamond(*nfa, budget));
  }
  SUBCASE("lock-step receive order is not commutable") {
    ExplicitNfa nfa;
    nfa.letters = {r1, r2};
    nfa.addState(true);
    nfa.addState(false);
    nfa.addState(true);
    nfa.initialStates = {0};
    nfa.addTransition(0, r1, 1);
    nfa.addTransition(1, r2, 2);
    Budget budget(10000);
    std::string offender;
    CHECK_FALSE(check_r_diamond(nfa, budget, &offender));
    CHECK(!offender.empty());
  }
  SUBCASE("the symmetric version commutes") {
    ExplicitNfa nfa;
    nfa.letters = {r1, r2};
    nfa.addState(true);
    nfa.addState(false);
    nfa.addState(false);
    nfa.addState(true);
    nfa.initialStates = {0};
    nfa.addTransition(0, r1, 1);
    nfa.addTransition(1, r2, 3);
    nfa.addTransition(0, r2, 2);
    nfa.addTransition(2, r1, 3);
    Budget budget(10000);
    CHECK(check_r_diamond(nfa, budget));
  }
}

TEST_CASE("products intersect languages") {
  auto even = evenAs();
  auto hasB = std::make_shared<ExplicitNfa>();
  hasB->letters = {la(), lb()};
  hasB->addState(false);
  hasB->addState(true);
  hasB->initialStates = {0};
  hasB->addTransition(0, la(), 0);
  hasB->addTransition(0, lb(), 1);
  hasB->addTransition(1, la(), 1);
  hasB->addTransition(1, lb(), 1);
  ProductNfa both(even, hasB);
  Word w1 = {lb()};
  Word w2 = {la(), lb()};
  Word w3 = {la(), lb(), la()};
  CHECK(member(both, w1));
  CHECK_FALSE(member(both, w2));
  CHECK(member(both, w3));
}
