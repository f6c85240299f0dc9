#include "co2/analysis.hpp"

#include "co2/syntax.hpp"
#include "co2/system_io.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace co2 {

namespace {

const Prefix* prefix_of(const Co2System& s, const StepRef& r)
{
    if (r.kind == StepKind::Call) return nullptr;
    return &s.processes.at(r.actor)[r.thread].branches()[r.branch].prefix;
}

bool acts_on(const Co2System& s, const StepRef& r, const std::string& who, const std::string& session)
{
    if (r.actor != who || r.kind != StepKind::Do) return false;
    const Prefix* p = prefix_of(s, r);
    return p->session.is_name() && p->session.id == session;
}

bool covered(const std::set<ReadySet>& family, const ReadySet& have)
{
    if (family.empty()) return true;
    return std::any_of(family.begin(), family.end(), [&](const ReadySet& x) {
        return std::includes(have.begin(), have.end(), x.begin(), x.end());
    });
}

}  // namespace

std::set<std::string> culpable(const Co2System& s, const std::string& session)
{
    auto it = s.sessions.find(session);
    if (it == s.sessions.end()) throw Error("unknown session " + session);
    std::set<std::string> out;
    for (const auto& m : enabled_moves(it->second)) out.insert(m.actor);
    return out;
}

ReadySet process_ready_set(const Co2System& s, const std::string& who, const std::string& session)
{
    ReadySet out;
    auto it = s.processes.find(who);
    if (it == s.processes.end()) return out;
    for (const auto& thread : it->second) {
        if (thread.kind() != Process::Kind::Sum) continue;
        for (const auto& b : thread.branches()) {
            const Prefix& p = b.prefix;
            if (p.kind == Prefix::Kind::Do && p.session.is_name() && p.session.id == session && p.part.is_name())
                out.insert(Interaction{p.part.id, p.sort, p.dir});
        }
    }
    return out;
}

Exploration explore(const Co2System& s0, std::size_t bound, const StepFilter& filter,
                    const std::function<bool(const Exploration&, std::size_t)>& visit)
{
    Exploration e;
    if (bound == 0) {
        e.truncated = true;
        return e;
    }
    std::unordered_map<std::string, std::size_t> seen;
    Co2System root = normalize(s0);
    seen.emplace(exploration_key(root), 0);
    e.states.push_back({std::move(root), std::nullopt, {}, 0});
    for (std::size_t i = 0; i < e.states.size(); ++i) {
        if (visit && !visit(e, i)) return e;
        const Co2System cur = e.states[i].system;
        for (const auto& ref : enabled_steps(cur)) {
            if (filter && !filter(cur, ref)) continue;
            auto [next, label] = fire(cur, ref);
            std::string key = exploration_key(next);
            if (seen.count(key)) continue;
            if (e.states.size() >= bound) {
                e.truncated = true;
                continue;
            }
            seen.emplace(std::move(key), e.states.size());
            e.states.push_back({std::move(next), i, std::move(label), e.states[i].depth + 1});
        }
    }
    return e;
}

std::vector<TraceStep> trace_to(const Exploration& e, std::size_t index)
{
    std::vector<std::size_t> path;
    for (std::optional<std::size_t> i = index; i && e.states[*i].parent; i = e.states[*i].parent) path.push_back(*i);
    std::reverse(path.begin(), path.end());
    std::vector<TraceStep> out;
    for (std::size_t i : path)
        out.push_back({out.size(), e.states[i].label, digest_hex(state_digest(e.states[i].system))});
    return out;
}

WeakReadySet weak_process_ready_set(const Co2System& s, const std::string& who, const std::string& session,
                                    std::size_t bound, const std::function<bool(const ReadySet&)>& enough)
{
    WeakReadySet out;
    bool stopped = false;
    auto filter = [&](const Co2System& sys, const StepRef& r) { return !acts_on(sys, r, who, session); };
    auto visit = [&](const Exploration& e, std::size_t i) {
        ReadySet here = process_ready_set(e.states[i].system, who, session);
        out.pairs.insert(here.begin(), here.end());
        if (enough && enough(out.pairs)) {
            stopped = true;
            return false;
        }
        return true;
    };
    Exploration e = explore(s, bound, filter, visit);
    out.states = e.states.size();
    out.truncated = e.truncated && !stopped;
    return out;
}

const char* to_string(Tri t)
{
    switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::Unknown: return "unknown";
    }
    return "unknown";
}

Readiness ready(const Co2System& s0, const std::string& who, std::size_t bound)
{
    Co2System s = normalize(s0);
    Readiness out;
    for (const auto& [name, t] : s.sessions) {
        auto c = t.contracts.find(who);
        if (c == t.contracts.end()) continue;
        ReadySetReport r;
        r.participant = who;
        r.session = name;
        r.contract_ready_sets = contract_ready_sets(c->second);
        r.process_ready_set = process_ready_set(s, who, name);
        r.weak_process_ready_set = r.process_ready_set;
        if (covered(r.contract_ready_sets, r.process_ready_set)) {
            r.ready = Tri::True;
        } else {
            auto w = weak_process_ready_set(s, who, name, bound,
                                            [&](const ReadySet& have) { return covered(r.contract_ready_sets, have); });
            r.weak_process_ready_set = w.pairs;
            r.depth_used = w.states;
            if (covered(r.contract_ready_sets, w.pairs))
                r.ready = Tri::True;
            else
                r.ready = w.truncated ? Tri::Unknown : Tri::False;
        }
        if (r.ready == Tri::False)
            out.verdict = Tri::False;
        else if (r.ready == Tri::Unknown && out.verdict == Tri::True)
            out.verdict = Tri::Unknown;
        out.reports.push_back(std::move(r));
    }
    return out;
}

bool is_initial_for(const Co2System& s, const std::string& who)
{
    for (const auto& [host, latent] : s.pools)
        for (const auto& l : latent)
            if (l.promiser == who) return false;
    for (const auto& [name, t] : s.sessions)
        if (t.contracts.count(who)) return false;
    return true;
}

HonestyVerdict check_honesty(const Co2System& s0, const std::string& who, const HonestyLimits& limits)
{
    if (!s0.processes.count(who)) throw PreconditionError("no participant " + who);
    if (!is_initial_for(s0, who)) throw PreconditionError("system is not initial for " + who);

    HonestyVerdict v;
    v.participant = who;
    std::vector<std::string> others;
    for (const auto& [name, _] : s0.processes)
        if (name != who) others.push_back(name);
    v.context = "the given system";
    if (!others.empty()) {
        v.context += " with";
        for (const auto& o : others) v.context += " " + o;
    }

    std::optional<std::size_t> bad;
    Readiness bad_readiness;
    auto visit = [&](const Exploration& e, std::size_t i) {
        Readiness r = ready(e.states[i].system, who, limits.depth_bound);
        if (r.verdict == Tri::Unknown) ++v.unknown_states;
        if (r.verdict != Tri::False) return true;
        bad = i;
        bad_readiness = std::move(r);
        return false;
    };
    Exploration e = explore(s0, limits.state_bound, {}, visit);
    v.states_explored = bad ? *bad + 1 : e.states.size();
    if (bad) {
        v.kind = HonestyVerdict::Kind::ViolationFound;
        v.trace = trace_to(e, *bad);
        v.state = e.states[*bad].system;
        for (auto& r : bad_readiness.reports)
            if (r.ready == Tri::False) {
                v.report = r;
                break;
            }
    } else {
        v.exhaustive = !e.truncated;
    }
    return v;
}

const char* to_string(PropertyViolation::Kind k)
{
    switch (k) {
    case PropertyViolation::Kind::NoCulpable: return "no-culpable";
    case PropertyViolation::Kind::UnenabledDo: return "unenabled-do";
    case PropertyViolation::Kind::Progress: return "progress";
    case PropertyViolation::Kind::NoExculpation: return "no-exculpation";
    }
    return "unknown";
}

namespace {

void check_culpability(const Co2System& s, std::size_t step, std::vector<PropertyViolation>& out)
{
    for (const auto& [name, t] : s.sessions) {
        if (is_terminated(t)) continue;
        if (culpable(s, name).empty())
            out.push_back({PropertyViolation::Kind::NoCulpable, step, name, {}, "non-terminated session without a culpable participant"});
    }
}

void check_do(const Co2System& before, const StepLabel& label, std::size_t step, std::vector<PropertyViolation>& out)
{
    if (label.kind != StepKind::Do) return;
    std::string session = label.session.value_or(label.prefix.session.id);
    auto it = before.sessions.find(session);
    MoveLabel m{label.actor, label.prefix.part.id, label.prefix.sort, label.prefix.dir};
    bool ok = false;
    if (it != before.sessions.end()) {
        auto moves = enabled_moves(it->second);
        ok = std::find(moves.begin(), moves.end(), m) != moves.end();
    }
    if (!ok)
        out.push_back({PropertyViolation::Kind::UnenabledDo, step, session, {}, label.actor + " fired a move its contract does not allow"});
}

std::optional<PropertyViolation> check_progress(const Co2System& s, std::size_t step)
{
    if (!enabled_steps(s).empty()) return std::nullopt;
    for (const auto& [name, t] : s.sessions) {
        if (is_terminated(t)) continue;
        PropertyViolation v{PropertyViolation::Kind::Progress, step, name, culpable(s, name), "stuck with a non-terminated session"};
        return v;
    }
    return std::nullopt;
}

}  // namespace

PropertyReport check_trace_properties(const std::vector<TraceStep>& steps, const Co2System& s0)
{
    std::vector<Co2System> states = replay(s0, steps);
    PropertyReport r;
    r.steps = steps.size();
    for (std::size_t i = 0; i < states.size(); ++i) {
        check_culpability(states[i], i, r.violations);
        if (i > 0) check_do(states[i - 1], steps[i - 1].label, i, r.violations);
    }
    const Co2System& last = states.back();
    // A stuck system reports every non-terminated session.
    if (enabled_steps(last).empty()) {
        for (const auto& [name, t] : last.sessions) {
            if (is_terminated(t)) continue;
            r.violations.push_back({PropertyViolation::Kind::Progress, steps.size(), name, culpable(last, name),
                                    "stuck with a non-terminated session"});
        }
    }
    for (const auto& [name, t] : last.sessions) {
        r.sessions_terminated[name] = is_terminated(t);
        r.culpable_at_end[name] = culpable(last, name);
    }
    return r;
}

TheoremReport check_theorems(const Co2System& s0, std::size_t bound)
{
    TheoremReport r;
    auto visit = [&](const Exploration& e, std::size_t i) {
        const ExploredState& st = e.states[i];
        check_culpability(st.system, st.depth, r.violations);
        if (st.parent) check_do(e.states[*st.parent].system, st.label, st.depth, r.violations);
        if (auto v = check_progress(st.system, st.depth)) r.stuck.push_back(*v);
        return true;
    };
    Exploration e = explore(s0, bound, {}, visit);
    r.states = e.states.size();
    r.truncated = e.truncated;
    return r;
}

bool can_exculpate(const Co2System& s, const std::string& who, const std::string& session, std::size_t depth)
{
    bool found = false;
    // Prefix steps of `who` alone: tau, tell and definition unfolding.
    auto filter = [&](const Co2System& sys, const StepRef& r) {
        if (r.actor != who) return false;
        if (acts_on(sys, r, who, session)) {
            found = true;
            return false;
        }
        return r.kind == StepKind::Tau || r.kind == StepKind::Tell || r.kind == StepKind::Call;
    };
    auto visit = [&](const Exploration& e, std::size_t i) {
        if (found) return false;
        return e.states[i].depth <= depth;
    };
    explore(s, std::max<std::size_t>(depth, 1) * 64, filter, visit);
    return found;
}

TheoremReport check_exculpation(const Co2System& s0, std::size_t bound, std::size_t depth)
{
    TheoremReport r;
    auto visit = [&](const Exploration& e, std::size_t i) {
        const ExploredState& st = e.states[i];
        for (const auto& [name, t] : st.system.sessions)
            for (const auto& who : culpable(st.system, name))
                if (!can_exculpate(st.system, who, name, depth))
                    r.violations.push_back({PropertyViolation::Kind::NoExculpation, st.depth, name, {who},
                                            who + " cannot act on " + name + " by itself"});
        return true;
    };
    Exploration e = explore(s0, bound, {}, visit);
    r.states = e.states.size();
    r.truncated = e.truncated;
    return r;
}

namespace {

nlohmann::ordered_json pairs_json(const ReadySet& s)
{
    auto out = nlohmann::ordered_json::array();
    for (const auto& i : s)
        out.push_back({{"peer", i.peer}, {"sort", i.sort.name}, {"dir", i.dir == Dir::Send ? "send" : "recv"}});
    return out;
}

nlohmann::ordered_json violation_json(const PropertyViolation& v)
{
    nlohmann::ordered_json j;
    j["kind"] = to_string(v.kind);
    j["step"] = v.step;
    j["session"] = v.session;
    j["culpable"] = v.culpable;
    j["detail"] = v.detail;
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const ReadySetReport& r)
{
    nlohmann::ordered_json j;
    j["participant"] = r.participant;
    j["session"] = r.session;
    auto family = nlohmann::ordered_json::array();
    for (const auto& x : r.contract_ready_sets) family.push_back(pairs_json(x));
    j["contractReadySets"] = family;
    j["processReadySet"] = pairs_json(r.process_ready_set);
    j["weakProcessReadySet"] = pairs_json(r.weak_process_ready_set);
    j["depthUsed"] = r.depth_used;
    j["ready"] = to_string(r.ready);
    return j;
}

nlohmann::ordered_json to_json(const HonestyVerdict& v)
{
    nlohmann::ordered_json j;
    j["participant"] = v.participant;
    if (v.kind == HonestyVerdict::Kind::ViolationFound) {
        j["result"] = "violation-found";
        auto trace = nlohmann::ordered_json::array();
        for (const auto& s : v.trace) trace.push_back(to_json(s));
        j["trace"] = trace;
        j["state"] = render_system(v.state);
        if (v.report) j["report"] = to_json(*v.report);
    } else {
        j["result"] = "no-violation-up-to-bound";
        j["exhaustive"] = v.exhaustive;
    }
    j["statesExplored"] = v.states_explored;
    j["unknownStates"] = v.unknown_states;
    j["context"] = v.context;
    return j;
}

nlohmann::ordered_json to_json(const PropertyReport& r)
{
    nlohmann::ordered_json j;
    j["ok"] = r.ok();
    j["steps"] = r.steps;
    auto vs = nlohmann::ordered_json::array();
    for (const auto& v : r.violations) vs.push_back(violation_json(v));
    j["violations"] = vs;
    nlohmann::ordered_json sessions = nlohmann::ordered_json::object();
    for (const auto& [name, done] : r.sessions_terminated)
        sessions[name] = {{"terminated", done}, {"culpable", r.culpable_at_end.at(name)}};
    j["sessions"] = sessions;
    return j;
}

}  // namespace co2
