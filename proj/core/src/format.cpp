#include "mbx/format.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace mbx {

namespace {

bool isIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool isIdent(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!isIdentChar(c)) return false;
  return true;
}

std::string stripComment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct RawLine {
  std::size_t number;
  std::vector<std::string> tokens;
  std::string joined;
};

std::vector<RawLine> rawLines(const std::string& text) {
  std::vector<RawLine> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string body = stripComment(line);
    auto toks = tokenize(body);
    if (toks.empty()) continue;
    std::string joined;
    for (const auto& t : toks) {
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    out.push_back(RawLine{n, std::move(toks), std::move(joined)});
  }
  return out;
}

// Splits "P!Q(m)" / "P?Q(m)" into (actor, kind, peer, message) name parts.
struct ActionParts {
  std::string actor, peer, message;
  ActionKind kind;
};

ActionParts splitActionToken(const std::string& tok, std::size_t line) {
  auto bang = tok.find_first_of("!?");
  auto open = tok.find('(');
  if (bang == std::string::npos || open == std::string::npos || tok.back() != ')' || open < bang)
    throw ParseError("malformed action '" + tok + "'", line);
  ActionParts parts;
  parts.kind = tok[bang] == '!' ? ActionKind::Send : ActionKind::Receive;
  parts.actor = tok.substr(0, bang);
  parts.peer = tok.substr(bang + 1, open - bang - 1);
  parts.message = tok.substr(open + 1, tok.size() - open - 2);
  if (!isIdent(parts.actor) || !isIdent(parts.peer) || !isIdent(parts.message))
    throw ParseError("malformed action '" + tok + "'", line);
  return parts;
}

}  // namespace

Cfm parse_cfm(const std::string& text) {
  auto lines = rawLines(text);
  if (lines.empty()) throw ParseError("empty input, expected 'system NAME'", 1);

  Cfm cfm;
  std::size_t i = 0;
  {
    const auto& l = lines[i];
    if (l.tokens.size() != 2 || l.tokens[0] != "system" || !isIdent(l.tokens[1]))
      throw ParseError("expected 'system NAME'", l.number);
    cfm.name = l.tokens[1];
    ++i;
  }

  // First pass: declare processes so transitions can reference later blocks.
  for (std::size_t j = i; j < lines.size(); ++j) {
    const auto& l = lines[j];
    if (l.tokens[0] == "process") {
      if (l.tokens.size() != 2 || !isIdent(l.tokens[1]))
        throw ParseError("expected 'process NAME'", l.number);
      if (cfm.processByName(l.tokens[1]))
        throw ParseError("duplicate process '" + l.tokens[1] + "'", l.number);
      cfm.addProcess(l.tokens[1]);
    }
  }
  if (cfm.processes.empty()) throw ParseError("system declares no processes", lines.back().number);

  std::optional<ProcessId> current;
  std::vector<bool> sawInit(cfm.processCount(), false);
  for (; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const auto& t = l.tokens;
    if (t[0] == "process") {
      if (current) throw ParseError("nested 'process' block", l.number);
      current = cfm.processByName(t[1]);
      continue;
    }
    if (t[0] == "endprocess") {
      if (!current) throw ParseError("'endprocess' outside a process block", l.number);
      if (t.size() != 1) throw ParseError("unexpected tokens after 'endprocess'", l.number);
      current = std::nullopt;
      continue;
    }
    if (t[0] == "init") {
      if (!current) throw ParseError("'init' outside a process block", l.number);
      if (t.size() != 2 || !isIdent(t[1])) throw ParseError("expected 'init STATE'", l.number);
      if (sawInit[*current]) throw ParseError("duplicate 'init'", l.number);
      cfm.processes[*current].initial = cfm.internState(*current, t[1]);
      sawInit[*current] = true;
      continue;
    }
    // Transition: S -> S' : action
    if (t.size() == 5 && t[1] == "->" && t[3] == ":") {
      if (!current) throw ParseError("transition outside a process block", l.number);
      ProcessId cur = *current;
      if (!isIdent(t[0]) || !isIdent(t[2])) throw ParseError("malformed state name", l.number);
      auto parts = splitActionToken(t[4], l.number);
      auto actor = cfm.processByName(parts.actor);
      auto peer = cfm.processByName(parts.peer);
      if (!actor) throw ParseError("unknown process '" + parts.actor + "'", l.number);
      if (!peer) throw ParseError("unknown process '" + parts.peer + "'", l.number);
      if (*actor != cur)
        throw ParseError("transition of process '" + cfm.processes[cur].name +
                             "' is performed by '" + parts.actor + "'",
                         l.number);
      if (*actor == *peer) throw ParseError("self-channel in action '" + t[4] + "'", l.number);
      LocalTransition tr;
      tr.from = cfm.internState(cur, t[0]);
      tr.to = cfm.internState(cur, t[2]);
      tr.action.kind = parts.kind;
      tr.action.actor = *actor;
      tr.action.peer = *peer;
      tr.action.message = cfm.internMessage(parts.message);
      cfm.processes[cur].transitions.push_back(tr);
      continue;
    }
    throw ParseError("unrecognized line '" + l.joined + "'", l.number);
  }
  if (current) throw ParseError("missing 'endprocess'", lines.back().number);
  for (std::size_t p = 0; p < cfm.processCount(); ++p) {
    if (!sawInit[p])
      throw ParseError("process '" + cfm.processes[p].name + "' has no 'init'", lines.back().number);
    if (cfm.processes[p].stateNames.empty()) cfm.internState(static_cast<ProcessId>(p), "S0");
  }
  cfm.validate();
  return cfm;
}

std::string render_cfm(const Cfm& cfm) {
  std::ostringstream out;
  out << "system " << cfm.name << "\n";
  for (const auto& p : cfm.processes) {
    out << "process " << p.name << "\n";
    out << "  init " << p.stateNames.at(p.initial) << "\n";
    for (const auto& t : p.transitions) {
      out << "  " << p.stateNames.at(t.from) << " -> " << p.stateNames.at(t.to) << " : "
          << cfm.actionText(t.action) << "\n";
    }
    out << "endprocess\n";
  }
  return out.str();
}

Action parse_action(const std::string& token, const Cfm& cfm, std::size_t line) {
  auto parts = splitActionToken(token, line);
  auto actor = cfm.processByName(parts.actor);
  auto peer = cfm.processByName(parts.peer);
  if (!actor) throw ParseError("unknown process '" + parts.actor + "'", line);
  if (!peer) throw ParseError("unknown process '" + parts.peer + "'", line);
  if (*actor == *peer) throw ParseError("self-channel in action '" + token + "'", line);
  auto msg = cfm.messageByName(parts.message);
  if (!msg) throw ParseError("unknown message '" + parts.message + "'", line);
  Action a;
  a.kind = parts.kind;
  a.actor = *actor;
  a.peer = *peer;
  a.message = *msg;
  return a;
}

Trace parse_trace(const std::string& text, const Cfm& cfm) {
  Trace out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto toks = tokenize(stripComment(line));
    if (toks.empty()) continue;
    if (toks.size() != 1) throw ParseError("expected one action per line", n);
    out.push_back(parse_action(toks[0], cfm, n));
  }
  return out;
}

std::string render_trace(const Trace& trace, const Cfm& cfm) {
  std::string out;
  for (const auto& a : trace) {
    out += cfm.actionText(a);
    out += '\n';
  }
  return out;
}

}  // namespace mbx
