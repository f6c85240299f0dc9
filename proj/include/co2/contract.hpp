#pragma once

// Behavioural contracts as local session types, and systems of contracts
// communicating over FIFO queues.

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace co2 {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by contract_step when the requested move is not permitted.
class IllegalMove : public Error {
public:
    using Error::Error;
};

struct Sort {
    std::string name;

    auto operator<=>(const Sort&) const = default;
};

// A participant reference: either a public participant name (upper-case in
// the surface syntax) or a participant variable (lower-case).
struct PartRef {
    enum class Kind { Name, Var };

    Kind kind = Kind::Name;
    std::string id;

    static PartRef name(std::string id) { return {Kind::Name, std::move(id)}; }
    static PartRef var(std::string id) { return {Kind::Var, std::move(id)}; }

    bool is_name() const { return kind == Kind::Name; }
    bool is_var() const { return kind == Kind::Var; }

    auto operator<=>(const PartRef&) const = default;
};

enum class Dir { Send, Recv };

struct SendBranch;
struct RecvBranch;

// Immutable contract term. Choices are stored sorted by (peer, sort), so two
// contracts differing only in the order of their branches compare equal.
class Contract {
public:
    enum class Kind { End, Send, Recv, Rec, Var };

    Contract();

    static Contract end();
    // Throws Error on an empty branch list or duplicate (peer, sort) pairs.
    static Contract send(std::vector<SendBranch> branches);
    // Throws Error on an empty branch list or duplicate sorts.
    static Contract recv(PartRef from, std::vector<RecvBranch> branches);
    static Contract rec(std::string var, Contract body);
    static Contract var(std::string name);

    Kind kind() const;
    bool is_end() const { return kind() == Kind::End; }

    const std::vector<SendBranch>& send_branches() const;
    const PartRef& recv_from() const;
    const std::vector<RecvBranch>& recv_branches() const;
    const std::string& rec_var() const;
    const Contract& rec_body() const;
    const std::string& var_name() const;

    friend std::strong_ordering operator<=>(const Contract& a, const Contract& b);
    friend bool operator==(const Contract& a, const Contract& b);

private:
    struct Node;
    explicit Contract(std::shared_ptr<const Node> node);

    std::shared_ptr<const Node> node_;
};

struct SendBranch {
    PartRef to;
    Sort sort;
    Contract cont;

    auto operator<=>(const SendBranch&) const = default;
};

struct RecvBranch {
    Sort sort;
    Contract cont;

    auto operator<=>(const RecvBranch&) const = default;
};

// One interaction a participant offers or owes: the peer, the sort and the
// direction seen from the participant itself.
struct Interaction {
    std::string peer;
    Sort sort;
    Dir dir = Dir::Send;

    auto operator<=>(const Interaction&) const = default;
};

using ReadySet = std::set<Interaction>;

// One-step unfolding of a top-level recursion; identity on anything else.
Contract unfold(const Contract& c);

// Unfolds until the head is not a recursion. Requires a guarded contract.
Contract unfold_head(const Contract& c);

Contract substitute_rec_var(const Contract& c, const std::string& var, const Contract& replacement);

// Replaces participant variables by the given references (typically names).
Contract substitute_parts(const Contract& c, const std::map<std::string, PartRef>& subst);

std::set<std::string> free_participant_vars(const Contract& c);
std::set<std::string> free_rec_vars(const Contract& c);
std::set<std::string> participant_names(const Contract& c);

// True when every recursion variable sits under at least one prefix inside
// its binder.
bool is_guarded(const Contract& c);
bool is_closed(const Contract& c);

// Alpha-renames bound recursion variables to depth-indexed names and drops
// binders whose variable does not occur.
Contract canonical(const Contract& c);

// Equality of the infinite trees denoted by two closed, guarded contracts.
bool equivalent(const Contract& a, const Contract& b);

// Like equivalent, except that the external choices of `projection` may
// offer only some of the sorts the corresponding choices of `contract` offer.
bool conforms(const Contract& projection, const Contract& contract);

// Throws Error("unstipulated contract") if c still has participant variables.
std::set<ReadySet> contract_ready_sets(const Contract& c);

struct MoveLabel {
    std::string actor;
    std::string peer;
    Sort sort;
    Dir dir = Dir::Send;

    auto operator<=>(const MoveLabel&) const = default;
};

using Channel = std::pair<std::string, std::string>;

// A session: one named contract per participant plus one FIFO queue per
// ordered pair of distinct participants (head of the vector = oldest).
struct ContractSystem {
    std::map<std::string, Contract> contracts;
    std::map<Channel, std::vector<Sort>> queues;

    static ContractSystem with_empty_queues(std::map<std::string, Contract> contracts);

    // Throws Error when the queue grid is incomplete or a contract is open.
    void validate() const;

    bool operator==(const ContractSystem&) const = default;
    auto operator<=>(const ContractSystem&) const = default;
};

std::vector<MoveLabel> enabled_moves(const ContractSystem& t);
ContractSystem contract_step(const ContractSystem& t, const MoveLabel& move);
bool is_terminated(const ContractSystem& t);

const char* to_string(Dir d);

}  // namespace co2
