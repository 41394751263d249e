#include "mbx/nfa_format.hpp"

#include <sstream>

#include "mbx/format.hpp"
#include "mbx/machines.hpp"

namespace mbx {

std::vector<std::string> TextNfa::labels() const {
  std::vector<std::string> out;
  for (const auto& t : transitions)
    if (std::find(out.begin(), out.end(), t.label) == out.end()) out.push_back(t.label);
  return out;
}

namespace {

std::vector<std::string> splitTokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

TextNfa parse_nfa_text(const std::string& text) {
  TextNfa out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  bool sawName = false, sawInit = false;

  auto stateId = [&](const std::string& name) {
    for (std::size_t i = 0; i < out.states.size(); ++i)
      if (out.states[i] == name) return static_cast<std::uint32_t>(i);
    out.states.push_back(name);
    return static_cast<std::uint32_t>(out.states.size() - 1);
  };

  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto toks = splitTokens(line);
    if (toks.empty()) continue;
    if (toks[0] == "nfa") {
      if (toks.size() != 2) throw ParseError("expected 'nfa NAME'", n);
      out.name = toks[1];
      sawName = true;
    } else if (toks[0] == "init") {
      if (toks.size() != 2) throw ParseError("expected 'init STATE'", n);
      out.initial = stateId(toks[1]);
      sawInit = true;
    } else if (toks[0] == "final") {
      for (std::size_t i = 1; i < toks.size(); ++i) out.finals.push_back(stateId(toks[i]));
    } else if (toks.size() == 5 && toks[1] == "->" && toks[3] == ":") {
      out.transitions.push_back({stateId(toks[0]), stateId(toks[2]), toks[4]});
    } else {
      throw ParseError("unrecognized line in nfa file", n);
    }
  }
  if (!sawName) throw ParseError("missing 'nfa NAME' header", n ? n : 1);
  if (!sawInit) throw ParseError("missing 'init' line", n ? n : 1);
  if (out.states.empty()) out.states.push_back("q0");
  return out;
}

ExplicitNfa property_from_text(const TextNfa& text, Cfm& cfm) {
  ExplicitNfa out;
  out.letters = system_alphabet(cfm, true, true);
  // Labels can mention messages the system itself never uses.
  for (const auto& t : text.transitions) {
    std::string label = t.label;
    auto dbl = label.find("!!");
    if (dbl != std::string::npos) label.erase(dbl, 1);
    auto open = label.find('(');
    auto bang = label.find_first_of("!?");
    if (open == std::string::npos || bang == std::string::npos || open < bang)
      throw Error("property transition label '" + t.label + "' is not an action");
    std::string msg = label.substr(open + 1, label.size() - open - 2);
    if (!cfm.messageByName(msg)) {
      cfm.internMessage(msg);
      out.letters = system_alphabet(cfm, true, true);
    }
  }
  for (std::size_t i = 0; i < text.states.size(); ++i) out.addState(false, text.states[i]);
  for (std::uint32_t f : text.finals) out.acceptingStates.at(f) = true;
  out.initialStates = {text.initial};
  for (const auto& t : text.transitions) {
    std::string label = t.label;
    bool barred = false;
    auto dbl = label.find("!!");
    if (dbl != std::string::npos) {
      barred = true;
      label.erase(dbl, 1);
    }
    Action a = parse_action(label, cfm);
    if (barred && !a.isSend()) throw Error("annotated label must be a send: '" + t.label + "'");
    Letter l = barred ? barredLetter(a) : (a.isSend() ? sendLetter(a) : receiveLetter(a));
    out.addTransition(t.from, l, t.to);
  }
  return out;
}

}  // namespace mbx
