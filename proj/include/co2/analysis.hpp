#pragma once

// Culpability, ready sets, readiness and bounded honesty checking, plus the
// exploration used to validate the calculus' theorems on concrete systems.

#include "co2/runtime.hpp"

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace co2 {

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Participants with an enabled move in session s. Throws Error for unknown
// sessions.
std::set<std::string> culpable(const Co2System& s, const std::string& session);

// Do-prefixes of `who` on `session` available at top level.
ReadySet process_ready_set(const Co2System& s, const std::string& who, const std::string& session);

struct WeakReadySet {
    ReadySet pairs;
    bool truncated = false;
    std::size_t states = 0;
};

// Union of process ready sets over the systems reachable without `who`
// acting on `session`, visiting at most `bound` systems. `enough`, when
// given, stops the search as soon as it holds for the pairs found so far.
WeakReadySet weak_process_ready_set(const Co2System& s, const std::string& who, const std::string& session,
                                    std::size_t bound, const std::function<bool(const ReadySet&)>& enough = {});

enum class Tri { False, True, Unknown };

const char* to_string(Tri t);

struct ReadySetReport {
    std::string participant;
    std::string session;
    std::set<ReadySet> contract_ready_sets;
    ReadySet process_ready_set;
    ReadySet weak_process_ready_set;
    std::size_t depth_used = 0;
    Tri ready = Tri::True;
};

struct Readiness {
    Tri verdict = Tri::True;
    std::vector<ReadySetReport> reports;  // one per session holding a contract of the participant
};

Readiness ready(const Co2System& s, const std::string& who, std::size_t bound = 2000);

// No latent or stipulated contract of `who` anywhere in s.
bool is_initial_for(const Co2System& s, const std::string& who);

struct HonestyLimits {
    std::size_t state_bound = 10000;
    std::size_t depth_bound = 2000;
};

struct HonestyVerdict {
    enum class Kind { ViolationFound, NoViolationUpToBound };

    Kind kind = Kind::NoViolationUpToBound;
    std::string participant;
    std::vector<TraceStep> trace;       // ViolationFound: from the normalized input
    Co2System state;                    // ViolationFound: where readiness fails
    std::optional<ReadySetReport> report;
    std::size_t states_explored = 0;
    std::size_t unknown_states = 0;     // readiness undecided within depth_bound
    bool exhaustive = false;            // the whole state space was visited
    std::string context;
};

// Explores every run of s0 breadth-first and checks readiness of `who` in
// each visited system. Throws PreconditionError unless s0 is initial for
// `who`.
HonestyVerdict check_honesty(const Co2System& s0, const std::string& who, const HonestyLimits& limits = {});

struct PropertyViolation {
    enum class Kind { NoCulpable, UnenabledDo, Progress, NoExculpation };

    Kind kind = Kind::NoCulpable;
    std::size_t step = 0;  // number of steps taken before the offending state
    std::string session;
    std::set<std::string> culpable;
    std::string detail;
};

const char* to_string(PropertyViolation::Kind k);

struct PropertyReport {
    std::vector<PropertyViolation> violations;
    std::size_t steps = 0;
    std::map<std::string, bool> sessions_terminated;  // at the final state
    std::map<std::string, std::set<std::string>> culpable_at_end;

    bool ok() const { return violations.empty(); }
};

// Replays the trace from s0 and checks, in every visited system, that each
// non-terminated session has a culpable participant and that every Do was
// a contract move; a final system with a non-terminated session and no
// enabled step is a progress violation. Throws ReplayError.
PropertyReport check_trace_properties(const std::vector<TraceStep>& steps, const Co2System& s0);

struct ExploredState {
    Co2System system;
    std::optional<std::size_t> parent;
    StepLabel label;  // of the step from the parent
    std::size_t depth = 0;
};

struct Exploration {
    std::vector<ExploredState> states;
    bool truncated = false;
};

using StepFilter = std::function<bool(const Co2System&, const StepRef&)>;

// Breadth-first exploration of the normalized s0, identifying systems by
// exploration_key. `visit` may stop the search by returning false.
Exploration explore(const Co2System& s0, std::size_t bound, const StepFilter& filter = {},
                    const std::function<bool(const Exploration&, std::size_t)>& visit = {});

// Steps leading from the root to states[index].
std::vector<TraceStep> trace_to(const Exploration& e, std::size_t index);

struct TheoremReport {
    std::size_t states = 0;
    bool truncated = false;
    std::vector<PropertyViolation> violations;  // NoCulpable and UnenabledDo
    std::vector<PropertyViolation> stuck;       // Progress, informative only
};

// Checks unambiguous culpability and contract fidelity of Do steps on every
// reachable system (up to bound).
TheoremReport check_theorems(const Co2System& s0, std::size_t bound = 10000);

// Whether `who`, culpable at `session` in s, can fire a Do on that session
// after at most depth steps of its own that are not Do steps on it.
bool can_exculpate(const Co2System& s, const std::string& who, const std::string& session, std::size_t depth = 64);

// For every reachable system and every culpable participant, checks
// can_exculpate; violations have kind NoExculpation.
TheoremReport check_exculpation(const Co2System& s0, std::size_t bound = 10000, std::size_t depth = 64);

nlohmann::ordered_json to_json(const ReadySetReport& r);
nlohmann::ordered_json to_json(const HonestyVerdict& v);
nlohmann::ordered_json to_json(const PropertyReport& r);

}  // namespace co2
