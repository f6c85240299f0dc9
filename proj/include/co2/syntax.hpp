#pragma once

// Text syntax for contracts and global types, and the JSON form of global
// types.
//
//   contract := term (("(+)" | "+") term)*
//   term     := part ("!" | "?") sort ("." unit)? | unit
//   unit     := "end" | "rec" x "." contract | x | "(" contract ")" | branch
//
//   global   := choice ("||" choice)*
//   choice   := seq ("\/" seq)*
//   seq      := A "->" B ":" sort (";" seq)? | "end" | "rec" x "." global
//             | x | "(" global ")"
//
// Upper-case identifiers are participant names, lower-case ones are
// participant or recursion variables. '#' starts a comment.

#include "co2/choreo.hpp"
#include "co2/contract.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace co2 {

struct Span {
    int line = 1;
    int col = 1;
    int end_line = 1;
    int end_col = 1;
};

struct Diagnostic {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    std::string message;
    Span span;
};

class ParseError : public Error {
public:
    explicit ParseError(std::vector<Diagnostic> diagnostics);

    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

// "3:14: message" (prefixed with the file name when given).
std::string format_diagnostic(const Diagnostic& d, std::string_view file = {});

Contract parse_contract(std::string_view text);
std::string render(const Contract& c);

// One `NAME: contract` declaration per line; blank lines and comments are
// skipped.
std::map<std::string, Contract> parse_named_contracts(std::string_view text);

GlobalType parse_global(std::string_view text);
std::string render(const GlobalType& g);

nlohmann::ordered_json to_json(const GlobalType& g);
GlobalType global_from_json(const nlohmann::json& j);

std::string render(const Interaction& i);
std::string render(const ReadySet& s);
std::string render(const ContractSystem& t);

}  // namespace co2
