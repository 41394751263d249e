#pragma once

// The `.nfa` text format. Transition labels are either communication actions
// (`p!q(m)`, `p?q(m)`, annotated sends `p!!q(m)`) for property automata, or
// bare identifiers for plain letter automata (benchmark generator inputs).

#include <string>
#include <vector>

#include "mbx/nfa.hpp"

namespace mbx {

struct TextNfa {
  std::string name;
  std::vector<std::string> states;
  std::uint32_t initial = 0;
  std::vector<std::uint32_t> finals;
  struct Transition {
    std::uint32_t from, to;
    std::string label;
  };
  std::vector<Transition> transitions;

  /// All distinct labels in first-use order.
  std::vector<std::string> labels() const;
};

/// Parses:
///   nfa NAME
///   init Q0
///   final Q1 Q2
///   Q0 -> Q1 : p!q(m)
TextNfa parse_nfa_text(const std::string& text);

/// Interprets the transitions as actions against the system's name tables.
/// Unknown processes are errors; fresh messages extend the vocabulary. The
/// resulting automaton ranges over the system's full send/annotated/receive
/// alphabet (absent letters simply have no transitions).
ExplicitNfa property_from_text(const TextNfa& text, Cfm& cfm);

}  // namespace mbx
