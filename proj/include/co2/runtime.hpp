#pragma once

// The CO2 calculus: processes, systems, reduction rules and a seeded fair
// scheduler.

#include "co2/choreo.hpp"
#include "co2/contract.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace co2 {

struct SessionRef {
    enum class Kind { Name, Var };

    Kind kind = Kind::Var;
    std::string id;

    static SessionRef name(std::string id) { return {Kind::Name, std::move(id)}; }
    static SessionRef var(std::string id) { return {Kind::Var, std::move(id)}; }

    bool is_name() const { return kind == Kind::Name; }

    auto operator<=>(const SessionRef&) const = default;
};

enum class FuseMode { Plain, Terminating, RecursiveOnly };

struct FusePolicy {
    std::size_t min_participants = 2;
    FuseMode mode = FuseMode::Plain;

    auto operator<=>(const FusePolicy&) const = default;
};

bool policy_check(const GlobalType& g, const FusePolicy& policy);

struct Prefix {
    enum class Kind { Tau, Tell, Fuse, Do };

    Kind kind = Kind::Tau;
    // Tell: the participant receiving the contract. Do: the peer.
    PartRef part;
    SessionRef session;
    Contract contract;                 // Tell
    std::optional<FusePolicy> policy;  // Fuse; the system default when absent
    Sort sort;                         // Do
    Dir dir = Dir::Send;               // Do

    static Prefix tau();
    static Prefix tell(PartRef target, std::string session_var, Contract c);
    static Prefix fuse(std::optional<FusePolicy> policy = std::nullopt);
    static Prefix act(SessionRef session, PartRef peer, Sort sort, Dir dir);

    auto operator<=>(const Prefix&) const = default;
};

struct SumBranch;

class Process {
public:
    enum class Kind { Nil, Sum, Par, Delim, Call };

    Process();

    static Process nil();
    static Process sum(std::vector<SumBranch> branches);
    static Process prefixed(Prefix p, Process cont = {});
    static Process par(std::vector<Process> parts);
    static Process delim(std::vector<std::string> session_vars, std::vector<std::string> part_vars, Process body);
    static Process call(std::string name, std::vector<SessionRef> session_args, std::vector<PartRef> part_args);

    Kind kind() const;

    const std::vector<SumBranch>& branches() const;
    const std::vector<Process>& parts() const;
    const std::vector<std::string>& session_vars() const;
    const std::vector<std::string>& part_vars() const;
    const Process& body() const;
    const std::string& callee() const;
    const std::vector<SessionRef>& session_args() const;
    const std::vector<PartRef>& part_args() const;

    friend std::strong_ordering operator<=>(const Process& a, const Process& b);
    friend bool operator==(const Process& a, const Process& b);

private:
    struct Node;
    explicit Process(std::shared_ptr<const Node> node);

    std::shared_ptr<const Node> node_;
};

struct SumBranch {
    Prefix prefix;
    Process cont;

    auto operator<=>(const SumBranch&) const = default;
};

struct LatentContract {
    std::string promiser;
    SessionRef session;
    Contract contract;

    auto operator<=>(const LatentContract&) const = default;
};

struct Definition {
    std::vector<std::string> session_params;
    std::vector<std::string> part_params;
    Process body;

    auto operator<=>(const Definition&) const = default;
};

enum class AgreementOrder { LargestFirst, SmallestFirst };

struct Co2System {
    // Before normalization each participant has a single process term;
    // afterwards, its list of parallel threads.
    std::map<std::string, std::vector<Process>> processes;
    // Latent contracts, keyed by the participant holding them.
    std::map<std::string, std::vector<LatentContract>> pools;
    std::map<std::string, ContractSystem> sessions;
    std::map<std::string, Definition> definitions;
    FusePolicy default_policy;
    AgreementOrder order = AgreementOrder::LargestFirst;
    std::uint64_t fresh = 0;

    bool operator==(const Co2System&) const = default;
};

// Flattens parallel composition, drops 0, and compiles delimitations away by
// renaming their variables apart. Throws Error for calls to unknown
// definitions or arity mismatches. Idempotent.
Co2System normalize(const Co2System& s);

struct Agreement {
    std::vector<std::size_t> members;  // indices into the pool
    std::map<std::string, std::string> pi;
    ContractSystem contracts;
    GlobalType global;
};

// Searches the pool for a compliant subset: subsets by size (largest first
// unless order says otherwise), then by promiser names; for each subset the
// participant-variable assignments in lexicographic order. Subsets have at
// least two members. Results are memoized.
std::optional<Agreement> find_agreement(const std::vector<LatentContract>& pool, const FusePolicy& policy,
                                        AgreementOrder order = AgreementOrder::LargestFirst);

enum class StepKind { Tell, Fuse, Do, Tau, Call };

const char* to_string(StepKind k);

struct StepRef {
    std::string actor;
    std::size_t thread = 0;
    std::size_t branch = 0;
    StepKind kind = StepKind::Tau;

    auto operator<=>(const StepRef&) const = default;
};

struct FuseReport {
    std::vector<std::string> participants;
    std::map<std::string, std::string> sigma;
    std::map<std::string, std::string> pi;
    GlobalType global;
    std::string session;

    bool operator==(const FuseReport&) const = default;
};

struct StepLabel {
    std::string actor;
    StepKind kind = StepKind::Tau;
    Prefix prefix;  // as fired; for Call, default-constructed
    std::optional<std::string> session;
    std::optional<FuseReport> fuse;
    std::string callee;  // Call
};

// Steps that can fire in a normalized system.
std::vector<StepRef> enabled_steps(const Co2System& s);

// Fires one enabled step. Throws Error when it is not enabled.
std::pair<Co2System, StepLabel> fire(const Co2System& s, const StepRef& step);

// Convenience wrappers checking the step kind.
std::pair<Co2System, StepLabel> reduce_tell(const Co2System& s, const std::string& actor, std::size_t thread,
                                            std::size_t branch);
std::pair<Co2System, StepLabel> reduce_fuse(const Co2System& s, const std::string& actor, std::size_t thread,
                                            std::size_t branch);
std::pair<Co2System, StepLabel> reduce_do(const Co2System& s, const std::string& actor, std::size_t thread,
                                          std::size_t branch);
std::pair<Co2System, StepLabel> reduce_tau(const Co2System& s, const std::string& actor, std::size_t thread,
                                           std::size_t branch);
std::pair<Co2System, StepLabel> reduce_call(const Co2System& s, const std::string& actor, std::size_t thread);

// Stable text form of a system, and a 64-bit FNV-1a digest of it.
std::string serialize(const Co2System& s);
std::uint64_t state_digest(const Co2System& s);
std::string digest_hex(std::uint64_t d);

// Serialization with renamed-apart identifiers and the fresh counter
// abstracted, identifying systems that differ only in generated names.
std::string exploration_key(const Co2System& s);

struct TraceStep {
    std::size_t index = 0;
    StepLabel label;
    std::string digest;  // of the system after the step
};

struct Trace {
    std::vector<TraceStep> steps;
    Co2System terminal;
};

struct SchedulerOptions {
    std::uint64_t seed = 0;
    std::size_t max_steps = 10000;
    std::size_t fairness_window = 64;
};

// Runs a normalized copy of s until no step is enabled or max_steps is hit.
// A step continuously enabled for fairness_window rounds is fired next.
Trace run(const Co2System& s, const SchedulerOptions& options = {});

class ReplayError : public Error {
public:
    using Error::Error;
};

// Re-executes recorded steps from s, matching labels and digests. Returns
// the visited systems, starting with the normalized s. Throws ReplayError.
std::vector<Co2System> replay(const Co2System& s, const std::vector<TraceStep>& steps);

bool same_step(const StepLabel& a, const StepLabel& b);

}  // namespace co2
