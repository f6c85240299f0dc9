#pragma once

// Text syntax of CO2 systems and the JSON-lines trace format.
//
//   file        := item*
//   item        := "def" X "(" vars ";" vars ")" "=" process
//                | "participant" A "{" process "}"
//                | "session" s "{" (A ":" contract ";" | "queue" A "->" B ":" "[" sorts "]" ";")* "}"
//                | "pool" A "{" (x ":" B "says" contract ";")* "}"
//                | "policy" "{" fuse-options "}"
//   process     := sum ("|" sum)*
//   sum         := prefixed ("+" prefixed)*
//   prefixed    := prefix ("." unit)? | unit
//   unit        := "0" | "(" process ")" | "(" vars ";" vars ")" unit | X "(" args ";" args ")"
//   prefix      := "tau" | "tell" A "@" x "{" contract "}" | "fuse" ("(" fuse-options ")")?
//                | "do" s A ("!" | "?") sort
//   fuse-options := option ("," option)*   with option "min=N" | "terminating" | "recursive"
//                   ("smallest" or "largest" also allowed in the policy block)

#include "co2/runtime.hpp"
#include "co2/syntax.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace co2 {

// Parses a system without normalizing it. Throws ParseError.
Co2System parse_system(std::string_view text);

std::string render(const Prefix& p);
std::string render(const Process& p);
std::string render(const LatentContract& l);
// Source form of a whole system; parse_system(render_system(s)) == s for
// systems produced by parse_system.
std::string render_system(const Co2System& s);

nlohmann::ordered_json to_json(const TraceStep& step);
TraceStep trace_step_from_json(const nlohmann::json& j);

void write_trace(std::ostream& out, const std::vector<TraceStep>& steps);
// Throws Error naming the offending line.
std::vector<TraceStep> read_trace(std::istream& in);

}  // namespace co2
