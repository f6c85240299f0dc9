#pragma once

// Global types (choreographies): structure, well-formedness and projection.

#include "co2/contract.hpp"

#include <compare>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace co2 {

class GlobalType {
public:
    enum class Kind { Msg, Choice, Par, Rec, Var, End };

    GlobalType();

    static GlobalType end();
    // Throws Error when from == to.
    static GlobalType msg(std::string from, std::string to, Sort sort, GlobalType cont);
    // Alternatives are kept in the given order; canonicalize() flattens and sorts.
    static GlobalType choice(std::vector<GlobalType> alternatives);
    static GlobalType par(std::vector<GlobalType> threads);
    static GlobalType rec(std::string var, GlobalType body);
    static GlobalType var(std::string name);

    Kind kind() const;

    const std::string& from() const;
    const std::string& to() const;
    const Sort& sort() const;
    const GlobalType& cont() const;
    // Alternatives of a Choice, threads of a Par.
    const std::vector<GlobalType>& children() const;
    const std::string& rec_var() const;
    const GlobalType& rec_body() const;
    const std::string& var_name() const;

    friend std::strong_ordering operator<=>(const GlobalType& a, const GlobalType& b);
    friend bool operator==(const GlobalType& a, const GlobalType& b);

private:
    struct Node;
    explicit GlobalType(std::shared_ptr<const Node> node);

    std::shared_ptr<const Node> node_;
};

std::set<std::string> participants(const GlobalType& g);
bool has_recursion(const GlobalType& g);
bool has_end(const GlobalType& g);

class ProjectionError : public Error {
public:
    using Error::Error;
};

// Local view of `participant`. Throws ProjectionError when the branches of a
// choice cannot be merged for it.
Contract project(const GlobalType& g, const std::string& participant);

struct WellFormedness {
    bool ok = true;
    std::vector<std::string> diagnostics;

    explicit operator bool() const { return ok; }
};

WellFormedness well_formed(const GlobalType& g);

// The participant deciding a choice: the unique sender of the first
// interactions of every alternative. Empty when there is none.
std::string choice_decider(const GlobalType& choice);

// Flattens and sorts Choice/Par, drops vacuous binders and renames bound
// variables by nesting depth. Idempotent.
GlobalType canonicalize(const GlobalType& g);

}  // namespace co2
