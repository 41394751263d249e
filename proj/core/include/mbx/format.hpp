#pragma once

// Text formats: the line-oriented `.cfm` system format and trace files
// (one action per line). Both are UTF-8 with `#` comments.

#include <string>

#include "mbx/model.hpp"

namespace mbx {

/// Parses a `.cfm` document:
///
///   system NAME
///   process P
///     init S0
///     S0 -> S1 : P!Q(m)
///   endprocess
///
/// Identifiers match [A-Za-z0-9_]+. Messages are declared implicitly by use.
/// Throws ParseError with a line number on malformed input; actor mismatches
/// and unknown peer processes are reported the same way.
Cfm parse_cfm(const std::string& text);

/// Canonical rendering; parse_cfm(render_cfm(c)) is structurally equal to c.
std::string render_cfm(const Cfm& cfm);

/// Parses an action in `p!q(m)` / `p?q(m)` syntax against cfm's name tables.
Action parse_action(const std::string& token, const Cfm& cfm, std::size_t line = 0);

/// Parses a trace file, one action per line.
Trace parse_trace(const std::string& text, const Cfm& cfm);

std::string render_trace(const Trace& trace, const Cfm& cfm);

}  // namespace mbx
