#pragma once

// Generic finite automata with lazily interned state spaces, plus the word
// and language operations the decision procedures rely on: shortest accepted
// word, membership, products, on-the-fly complementation, materialization,
// minimization, and the receive-diamond check.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbx/model.hpp"

namespace mbx {

/// Alphabet tags used by the causality machines; None everywhere else.
enum class Tag : std::uint8_t { None, Circle, Bullet };

enum class LetterKind : std::uint8_t { Send, BarredSend, Receive, Divider };

/// One alphabet symbol: an action (plain send, annotated send, or receive),
/// optionally tagged, or the block divider '#'.
struct Letter {
  LetterKind kind{LetterKind::Send};
  Tag tag{Tag::None};
  Action action;

  bool isSendLike() const { return kind == LetterKind::Send || kind == LetterKind::BarredSend; }

  friend bool operator==(const Letter&, const Letter&) = default;
  friend bool operator<(const Letter& a, const Letter& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.tag != b.tag) return a.tag < b.tag;
    return a.action < b.action;
  }
};

inline Letter sendLetter(const Action& a) { return Letter{LetterKind::Send, Tag::None, a}; }
inline Letter barredLetter(const Action& a) { return Letter{LetterKind::BarredSend, Tag::None, a}; }
inline Letter receiveLetter(const Action& a) { return Letter{LetterKind::Receive, Tag::None, a}; }
inline Letter divider() { return Letter{LetterKind::Divider, Tag::None, Action{}}; }

struct LetterHash {
  std::size_t operator()(const Letter& l) const {
    return (std::size_t(l.kind) << 40) ^ (std::size_t(l.tag) << 34) ^ ActionHash{}(l.action);
  }
};

std::string letter_text(const Letter& l, const Cfm& cfm);

using Word = std::vector<Letter>;

/// A nondeterministic automaton over an explicit finite alphabet. States are
/// dense ids handed out lazily by the implementation; expansion must be a
/// deterministic function of the state.
class Nfa {
 public:
  virtual ~Nfa() = default;

  virtual const std::vector<Letter>& alphabet() const = 0;
  virtual std::vector<std::uint32_t> initials() = 0;
  virtual bool accepting(std::uint32_t state) = 0;

  /// Enumerates all labeled successors of a state.
  virtual void expand(std::uint32_t state,
                      const std::function<void(const Letter&, std::uint32_t)>& sink) = 0;

  /// Epsilon successors; empty by default.
  virtual void expandEpsilon(std::uint32_t state, const std::function<void(std::uint32_t)>& sink);

  virtual std::string describe(std::uint32_t state);

  /// Number of states interned so far (exploration footprint, for stats).
  virtual std::size_t statesInterned() const = 0;

  /// Successors by a specific letter (filtering expand by default).
  virtual std::vector<std::uint32_t> successors(std::uint32_t state, const Letter& l);
};

/// Shortest accepted word, or nullopt when the language is empty. Breadth
/// first over epsilon closures, so the returned witness has minimal length.
std::optional<Word> shortest_accepted(Nfa& nfa, Budget& budget);

bool member(Nfa& nfa, std::span<const Letter> word);

/// All accepted words up to the given length (distinct words, sorted).
std::vector<Word> accepted_words_up_to(Nfa& nfa, std::size_t maxlen, Budget& budget,
                                       std::size_t maxWords = 1'000'000);

/// Reachable state ids (by expand and epsilon edges).
std::vector<std::uint32_t> reachable_states(Nfa& nfa, Budget& budget);

/// Explicitly tabulated automaton; also the output of determinization and
/// minimization, and the parse target for property files.
class ExplicitNfa : public Nfa {
 public:
  std::vector<Letter> letters;
  std::vector<std::uint32_t> initialStates;
  std::vector<bool> acceptingStates;
  // transitions[state][letterIndex] -> successor states
  std::vector<std::vector<std::vector<std::uint32_t>>> transitions;
  std::vector<std::string> stateNames;

  std::size_t stateCount() const { return acceptingStates.size(); }
  std::uint32_t addState(bool accept, std::string name = {});
  std::size_t letterIndex(const Letter& l) const;
  void addTransition(std::uint32_t from, const Letter& l, std::uint32_t to);

  const std::vector<Letter>& alphabet() const override { return letters; }
  std::vector<std::uint32_t> initials() override { return initialStates; }
  bool accepting(std::uint32_t state) override { return acceptingStates.at(state); }
  void expand(std::uint32_t state,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override;
  std::string describe(std::uint32_t state) override;
  std::size_t statesInterned() const override { return acceptingStates.size(); }
};

/// Materializes the reachable part of an automaton (epsilon edges are closed
/// away). Throws BudgetExceeded when the space is larger than the budget.
ExplicitNfa materialize(Nfa& nfa, Budget& budget);

/// Subset construction; the result is a complete deterministic automaton
/// (one successor per letter, dead state included).
ExplicitNfa determinize(const ExplicitNfa& nfa);

/// Hopcroft-style partition refinement on a complete DFA.
ExplicitNfa minimal_dfa(const ExplicitNfa& dfa);

/// Complement via determinization of the reachable part.
ExplicitNfa complement(const ExplicitNfa& nfa);

/// Synchronous product (intersection) of two automata over a shared alphabet.
class ProductNfa : public Nfa {
 public:
  ProductNfa(std::shared_ptr<Nfa> left, std::shared_ptr<Nfa> right);

  const std::vector<Letter>& alphabet() const override { return alphabet_; }
  std::vector<std::uint32_t> initials() override;
  bool accepting(std::uint32_t state) override;
  void expand(std::uint32_t state,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override;
  std::string describe(std::uint32_t state) override;
  std::size_t statesInterned() const override { return states_.size(); }

 private:
  std::uint32_t intern(std::uint64_t key);
  std::shared_ptr<Nfa> left_, right_;
  std::vector<Letter> alphabet_;
  std::vector<std::uint64_t> states_;
  std::map<std::uint64_t, std::uint32_t> index_;
};

/// On-the-fly complement: lazily determinized subsets with flipped
/// acceptance. Epsilon transitions of the inner automaton are closed away.
class ComplementNfa : public Nfa {
 public:
  explicit ComplementNfa(std::shared_ptr<Nfa> inner);

  const std::vector<Letter>& alphabet() const override { return inner_->alphabet(); }
  std::vector<std::uint32_t> initials() override;
  bool accepting(std::uint32_t state) override;
  void expand(std::uint32_t state,
              const std::function<void(const Letter&, std::uint32_t)>& sink) override;
  std::string describe(std::uint32_t state) override;
  std::size_t statesInterned() const override { return subsets_.size(); }

 private:
  std::vector<std::uint32_t> closure(std::vector<std::uint32_t> states);
  std::uint32_t intern(std::vector<std::uint32_t> subset);
  std::shared_ptr<Nfa> inner_;
  std::vector<std::vector<std::uint32_t>> subsets_;
  std::map<std::vector<std::uint32_t>, std::uint32_t> index_;
};

/// Receive-diamond: receives by distinct processes commute on every reachable
/// state pair. `offender` (when given) receives a description of the first
/// violating state and receive pair.
bool check_r_diamond(Nfa& nfa, Budget& budget, std::string* offender = nullptr);

std::string nfa_to_dot(Nfa& nfa, const Cfm& cfm, Budget& budget);

}  // namespace mbx
