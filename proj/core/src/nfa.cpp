#include "mbx/nfa.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace mbx {

void Nfa::expandEpsilon(std::uint32_t, const std::function<void(std::uint32_t)>&) {}

std::string Nfa::describe(std::uint32_t state) { return "q" + std::to_string(state); }

std::vector<std::uint32_t> Nfa::successors(std::uint32_t state, const Letter& l) {
  std::vector<std::uint32_t> out;
  expand(state, [&](const Letter& got, std::uint32_t next) {
    if (got == l) out.push_back(next);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string letter_text(const Letter& l, const Cfm& cfm) {
  if (l.kind == LetterKind::Divider) return "#";
  std::string body = cfm.actionText(l.action);
  if (l.kind == LetterKind::BarredSend) {
    auto bang = body.find('!');
    body.insert(bang, "!");  // p!!q(m) marks an annotated send
  }
  if (l.tag == Tag::Bullet) body += "*";
  return body;
}

namespace {

std::vector<std::uint32_t> epsilonClosure(Nfa& nfa, std::vector<std::uint32_t> states) {
  std::set<std::uint32_t> seen(states.begin(), states.end());
  std::deque<std::uint32_t> todo(states.begin(), states.end());
  while (!todo.empty()) {
    std::uint32_t s = todo.front();
    todo.pop_front();
    nfa.expandEpsilon(s, [&](std::uint32_t next) {
      if (seen.insert(next).second) todo.push_back(next);
    });
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

std::optional<Word> shortest_accepted(Nfa& nfa, Budget& budget) {
  struct Crumb {
    std::int64_t parent;
    Letter letter;
  };
  std::vector<Crumb> crumbs;
  std::set<std::uint32_t> seen;
  std::deque<std::pair<std::uint32_t, std::int64_t>> frontier;

  auto push = [&](std::uint32_t state, std::int64_t crumb) {
    if (!seen.insert(state).second) return;
    budget.charge();
    frontier.emplace_back(state, crumb);
  };

  for (std::uint32_t s : epsilonClosure(nfa, nfa.initials())) push(s, -1);
  while (!frontier.empty()) {
    auto [state, crumb] = frontier.front();
    frontier.pop_front();
    if (nfa.accepting(state)) {
      Word w;
      for (std::int64_t c = crumb; c >= 0; c = crumbs[c].parent) w.push_back(crumbs[c].letter);
      std::reverse(w.begin(), w.end());
      return w;
    }
    nfa.expand(state, [&](const Letter& l, std::uint32_t next) {
      for (std::uint32_t closed : epsilonClosure(nfa, {next})) {
        if (seen.count(closed)) continue;
        crumbs.push_back(Crumb{crumb, l});
        push(closed, static_cast<std::int64_t>(crumbs.size()) - 1);
      }
    });
  }
  return std::nullopt;
}

bool member(Nfa& nfa, std::span<const Letter> word) {
  std::vector<std::uint32_t> current = epsilonClosure(nfa, nfa.initials());
  for (const Letter& l : word) {
    std::set<std::uint32_t> next;
    for (std::uint32_t s : current)
      for (std::uint32_t t : nfa.successors(s, l)) next.insert(t);
    current = epsilonClosure(nfa, {next.begin(), next.end()});
    if (current.empty()) return false;
  }
  for (std::uint32_t s : current)
    if (nfa.accepting(s)) return true;
  return false;
}

namespace {

void collectWords(Nfa& nfa, const std::vector<std::uint32_t>& subset, std::size_t depth,
                  std::size_t maxlen, Word& current, Budget& budget, std::size_t maxWords,
                  std::set<Word>& out) {
  budget.charge();
  for (std::uint32_t s : subset)
    if (nfa.accepting(s)) {
      out.insert(current);
      if (out.size() > maxWords) throw BudgetExceeded(maxWords);
      break;
    }
  if (depth == maxlen) return;
  // Group successors of the whole subset by letter.
  std::map<Letter, std::set<std::uint32_t>> byLetter;
  for (std::uint32_t s : subset)
    nfa.expand(s, [&](const Letter& l, std::uint32_t next) { byLetter[l].insert(next); });
  for (auto& [letter, nexts] : byLetter) {
    auto closed = epsilonClosure(nfa, {nexts.begin(), nexts.end()});
    current.push_back(letter);
    collectWords(nfa, closed, depth + 1, maxlen, current, budget, maxWords, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<Word> accepted_words_up_to(Nfa& nfa, std::size_t maxlen, Budget& budget,
                                       std::size_t maxWords) {
  std::set<Word> out;
  Word current;
  auto init = epsilonClosure(nfa, nfa.initials());
  collectWords(nfa, init, 0, maxlen, current, budget, maxWords, out);
  return {out.begin(), out.end()};
}

std::vector<std::uint32_t> reachable_states(Nfa& nfa, Budget& budget) {
  std::set<std::uint32_t> seen;
  std::deque<std::uint32_t> todo;
  for (std::uint32_t s : nfa.initials())
    if (seen.insert(s).second) todo.push_back(s);
  while (!todo.empty()) {
    std::uint32_t s = todo.front();
    todo.pop_front();
    budget.charge();
    auto visit = [&](std::uint32_t next) {
      if (seen.insert(next).second) todo.push_back(next);
    };
    nfa.expand(s, [&](const Letter&, std::uint32_t next) { visit(next); });
    nfa.expandEpsilon(s, visit);
  }
  return {seen.begin(), seen.end()};
}

std::uint32_t ExplicitNfa::addState(bool accept, std::string name) {
  acceptingStates.push_back(accept);
  transitions.emplace_back(letters.size());
  if (name.empty()) name = "q" + std::to_string(acceptingStates.size() - 1);
  stateNames.push_back(std::move(name));
  return static_cast<std::uint32_t>(acceptingStates.size() - 1);
}

std::size_t ExplicitNfa::letterIndex(const Letter& l) const {
  for (std::size_t i = 0; i < letters.size(); ++i)
    if (letters[i] == l) return i;
  throw Error("letter is not in the automaton alphabet");
}

void ExplicitNfa::addTransition(std::uint32_t from, const Letter& l, std::uint32_t to) {
  transitions.at(from).at(letterIndex(l)).push_back(to);
}

void ExplicitNfa::expand(std::uint32_t state,
                         const std::function<void(const Letter&, std::uint32_t)>& sink) {
  const auto& rows = transitions.at(state);
  for (std::size_t li = 0; li < letters.size(); ++li)
    for (std::uint32_t next : rows[li]) sink(letters[li], next);
}

std::string ExplicitNfa::describe(std::uint32_t state) { return stateNames.at(state); }

ExplicitNfa materialize(Nfa& nfa, Budget& budget) {
  ExplicitNfa out;
  out.letters = nfa.alphabet();
  std::map<std::uint32_t, std::uint32_t> remap;
  std::deque<std::uint32_t> todo;
  auto require = [&](std::uint32_t s) {
    auto it = remap.find(s);
    if (it != remap.end()) return it->second;
    std::uint32_t id = out.addState(nfa.accepting(s), nfa.describe(s));
    remap.emplace(s, id);
    todo.push_back(s);
    return id;
  };
  // Epsilon edges are closed away at materialization time.
  std::vector<std::uint32_t> initClosed;
  {
    std::set<std::uint32_t> seen;
    std::deque<std::uint32_t> q;
    for (std::uint32_t s : nfa.initials())
      if (seen.insert(s).second) q.push_back(s);
    while (!q.empty()) {
      std::uint32_t s = q.front();
      q.pop_front();
      initClosed.push_back(s);
      nfa.expandEpsilon(s, [&](std::uint32_t n) {
        if (seen.insert(n).second) q.push_back(n);
      });
    }
  }
  for (std::uint32_t s : initClosed) out.initialStates.push_back(require(s));
  while (!todo.empty()) {
    std::uint32_t s = todo.front();
    todo.pop_front();
    budget.charge();
    std::uint32_t from = remap.at(s);
    nfa.expand(s, [&](const Letter& l, std::uint32_t next) {
      // Close the target under epsilon; every member becomes a successor.
      std::set<std::uint32_t> seen{next};
      std::deque<std::uint32_t> q{next};
      while (!q.empty()) {
        std::uint32_t t = q.front();
        q.pop_front();
        out.addTransition(from, l, require(t));
        nfa.expandEpsilon(t, [&](std::uint32_t n) {
          if (seen.insert(n).second) q.push_back(n);
        });
      }
    });
    // A state whose epsilon closure reaches an accepting state accepts.
    if (!out.acceptingStates[from]) {
      std::set<std::uint32_t> seen{s};
      std::deque<std::uint32_t> q{s};
      while (!q.empty() && !out.acceptingStates[from]) {
        std::uint32_t t = q.front();
        q.pop_front();
        if (nfa.accepting(t)) out.acceptingStates[from] = true;
        nfa.expandEpsilon(t, [&](std::uint32_t n) {
          if (seen.insert(n).second) q.push_back(n);
        });
      }
    }
  }
  for (auto& rows : out.transitions)
    for (auto& row : rows) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  return out;
}

ExplicitNfa determinize(const ExplicitNfa& nfa) {
  ExplicitNfa out;
  out.letters = nfa.letters;
  std::map<std::vector<std::uint32_t>, std::uint32_t> index;
  std::deque<std::vector<std::uint32_t>> todo;

  auto intern = [&](std::vector<std::uint32_t> subset) {
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
    auto it = index.find(subset);
    if (it != index.end()) return it->second;
    bool accept = false;
    for (std::uint32_t s : subset) accept = accept || nfa.acceptingStates[s];
    std::uint32_t id = out.addState(accept);
    index.emplace(subset, id);
    todo.push_back(subset);
    return id;
  };

  out.initialStates.push_back(intern(nfa.initialStates));
  while (!todo.empty()) {
    auto subset = todo.front();
    todo.pop_front();
    std::uint32_t from = index.at(subset);
    for (std::size_t li = 0; li < nfa.letters.size(); ++li) {
      std::vector<std::uint32_t> next;
      for (std::uint32_t s : subset)
        for (std::uint32_t t : nfa.transitions[s][li]) next.push_back(t);
      out.transitions[from][li].assign(1, intern(std::move(next)));
    }
  }
  return out;
}

ExplicitNfa minimal_dfa(const ExplicitNfa& dfa) {
  // Moore partition refinement; expects a complete DFA.
  std::size_t n = dfa.stateCount();
  std::vector<std::size_t> part(n);
  for (std::size_t s = 0; s < n; ++s) part[s] = dfa.acceptingStates[s] ? 1 : 0;
  std::size_t parts = 2;
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::vector<std::size_t>, std::size_t> signatureIndex;
    std::vector<std::size_t> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::size_t> sig{part[s]};
      for (std::size_t li = 0; li < dfa.letters.size(); ++li) {
        if (dfa.transitions[s][li].size() != 1) throw Error("minimal_dfa expects a complete DFA");
        sig.push_back(part[dfa.transitions[s][li][0]]);
      }
      auto [it, fresh] = signatureIndex.emplace(std::move(sig), signatureIndex.size());
      next[s] = it->second;
    }
    if (signatureIndex.size() != parts) changed = true;
    parts = signatureIndex.size();
    part = std::move(next);
  }
  ExplicitNfa out;
  out.letters = dfa.letters;
  for (std::size_t c = 0; c < parts; ++c) out.addState(false);
  std::vector<bool> done(parts, false);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t c = part[s];
    out.acceptingStates[c] = dfa.acceptingStates[s];
    if (!done[c]) {
      done[c] = true;
      for (std::size_t li = 0; li < dfa.letters.size(); ++li)
        out.transitions[c][li].assign(1, static_cast<std::uint32_t>(part[dfa.transitions[s][li][0]]));
    }
  }
  out.initialStates.push_back(static_cast<std::uint32_t>(part[dfa.initialStates.at(0)]));
  return out;
}

ExplicitNfa complement(const ExplicitNfa& nfa) {
  ExplicitNfa det = determinize(nfa);
  for (std::size_t s = 0; s < det.stateCount(); ++s)
    det.acceptingStates[s] = !det.acceptingStates[s];
  return det;
}

ProductNfa::ProductNfa(std::shared_ptr<Nfa> left, std::shared_ptr<Nfa> right)
    : left_(std::move(left)), right_(std::move(right)) {
  // Shared alphabet: intersect, keeping the left order.
  for (const Letter& l : left_->alphabet()) {
    const auto& ra = right_->alphabet();
    if (std::find(ra.begin(), ra.end(), l) != ra.end()) alphabet_.push_back(l);
  }
}

std::uint32_t ProductNfa::intern(std::uint64_t key) {
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(states_.size());
  states_.push_back(key);
  index_.emplace(key, id);
  return id;
}

std::vector<std::uint32_t> ProductNfa::initials() {
  std::vector<std::uint32_t> out;
  for (std::uint32_t l : left_->initials())
    for (std::uint32_t r : right_->initials())
      out.push_back(intern((std::uint64_t(l) << 32) | r));
  return out;
}

bool ProductNfa::accepting(std::uint32_t state) {
  std::uint64_t key = states_.at(state);
  return left_->accepting(key >> 32) && right_->accepting(key & 0xffffffffu);
}

void ProductNfa::expand(std::uint32_t state,
                        const std::function<void(const Letter&, std::uint32_t)>& sink) {
  std::uint64_t key = states_.at(state);
  std::uint32_t l = key >> 32, r = key & 0xffffffffu;
  left_->expand(l, [&](const Letter& letter, std::uint32_t lnext) {
    for (std::uint32_t rnext : right_->successors(r, letter))
      sink(letter, intern((std::uint64_t(lnext) << 32) | rnext));
  });
}

std::string ProductNfa::describe(std::uint32_t state) {
  std::uint64_t key = states_.at(state);
  return "(" + left_->describe(key >> 32) + "," + right_->describe(key & 0xffffffffu) + ")";
}

ComplementNfa::ComplementNfa(std::shared_ptr<Nfa> inner) : inner_(std::move(inner)) {}

std::vector<std::uint32_t> ComplementNfa::closure(std::vector<std::uint32_t> states) {
  std::set<std::uint32_t> seen(states.begin(), states.end());
  std::deque<std::uint32_t> todo(states.begin(), states.end());
  while (!todo.empty()) {
    std::uint32_t s = todo.front();
    todo.pop_front();
    inner_->expandEpsilon(s, [&](std::uint32_t n) {
      if (seen.insert(n).second) todo.push_back(n);
    });
  }
  return {seen.begin(), seen.end()};
}

std::uint32_t ComplementNfa::intern(std::vector<std::uint32_t> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  auto it = index_.find(subset);
  if (it != index_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(subsets_.size());
  subsets_.push_back(subset);
  index_.emplace(std::move(subset), id);
  return id;
}

std::vector<std::uint32_t> ComplementNfa::initials() { return {intern(closure(inner_->initials()))}; }

bool ComplementNfa::accepting(std::uint32_t state) {
  for (std::uint32_t s : subsets_.at(state))
    if (inner_->accepting(s)) return false;
  return true;
}

void ComplementNfa::expand(std::uint32_t state,
                           const std::function<void(const Letter&, std::uint32_t)>& sink) {
  auto subset = subsets_.at(state);  // copy: interning may grow the pool
  for (const Letter& l : inner_->alphabet()) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t s : subset) {
      auto succ = inner_->successors(s, l);
      next.insert(next.end(), succ.begin(), succ.end());
    }
    sink(l, intern(closure(std::move(next))));
  }
}

std::string ComplementNfa::describe(std::uint32_t state) {
  std::string out = "{";
  for (std::uint32_t s : subsets_.at(state)) {
    if (out.size() > 1) out += " ";
    out += inner_->describe(s);
  }
  return out + "}";
}

bool check_r_diamond(Nfa& nfa, Budget& budget, std::string* offender) {
  auto states = reachable_states(nfa, budget);
  std::vector<Letter> receives;
  for (const Letter& l : nfa.alphabet())
    if (l.kind == LetterKind::Receive) receives.push_back(l);
  for (std::uint32_t s : states) {
    for (const Letter& a : receives) {
      for (const Letter& b : receives) {
        if (a.action.actor == b.action.actor) continue;
        std::set<std::uint32_t> ab, ba;
        for (std::uint32_t mid : nfa.successors(s, a))
          for (std::uint32_t t : nfa.successors(mid, b)) ab.insert(t);
        for (std::uint32_t mid : nfa.successors(s, b))
          for (std::uint32_t t : nfa.successors(mid, a)) ba.insert(t);
        if (ab != ba) {
          if (offender) {
            *offender = "state " + nfa.describe(s) + " distinguishes receive orders";
          }
          return false;
        }
      }
    }
  }
  return true;
}

std::string nfa_to_dot(Nfa& nfa, const Cfm& cfm, Budget& budget) {
  std::ostringstream out;
  out << "digraph nfa {\n  rankdir=LR;\n  node [shape=circle fontsize=10];\n";
  auto states = reachable_states(nfa, budget);
  for (std::uint32_t s : states) {
    out << "  s" << s << " [label=\"" << nfa.describe(s) << "\""
        << (nfa.accepting(s) ? " shape=doublecircle" : "") << "];\n";
  }
  for (std::uint32_t s : states) {
    nfa.expand(s, [&](const Letter& l, std::uint32_t t) {
      out << "  s" << s << " -> s" << t << " [label=\"" << letter_text(l, cfm) << "\"];\n";
    });
    nfa.expandEpsilon(s, [&](std::uint32_t t) {
      out << "  s" << s << " -> s" << t << " [label=\"eps\" style=dashed];\n";
    });
  }
  out << "}\n";
  return out.str();
}

}  // namespace mbx
