#include "co2/analysis.hpp"
#include "co2/synthesis.hpp"
#include "co2/syntax.hpp"
#include "co2/system_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace {

using namespace co2;

enum Exit { Ok = 0, SynthFailed = 1, InputError = 2, Violation = 3, Precondition = 4, Replay = 5 };

struct InputFailure {
    std::string file;
    std::vector<Diagnostic> diagnostics;
    std::string message;
};

bool color_enabled()
{
    const char* c = std::getenv("CO2_COLOR");
    if (c && std::string(c) == "never") return false;
    return isatty(STDERR_FILENO);
}

void report(const InputFailure& f)
{
    bool color = color_enabled();
    const char* on = color ? "\033[31m" : "";
    const char* off = color ? "\033[0m" : "";
    if (f.diagnostics.empty()) {
        std::cerr << on << "error" << off << ": " << (f.file.empty() ? "" : f.file + ": ") << f.message << "\n";
        return;
    }
    for (const auto& d : f.diagnostics) std::cerr << on << format_diagnostic(d, f.file) << off << "\n";
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputFailure{path, {}, "cannot read file"};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename F>
auto parse_input(const std::string& path, F parse)
{
    std::string text = read_file(path);
    try {
        return parse(text);
    } catch (const ParseError& e) {
        throw InputFailure{path, e.diagnostics(), e.what()};
    } catch (const Error& e) {
        throw InputFailure{path, {}, e.what()};
    }
}

void emit(const std::string& out_path, const std::string& text)
{
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw InputFailure{out_path, {}, "cannot write file"};
    out << text;
}

struct PolicyFlags {
    std::size_t min = 0;
    bool terminating = false;
    bool recursive = false;
    bool smallest = false;

    void apply(Co2System& s) const
    {
        if (min) s.default_policy.min_participants = min;
        if (terminating) s.default_policy.mode = FuseMode::Terminating;
        if (recursive) s.default_policy.mode = FuseMode::RecursiveOnly;
        if (smallest) s.order = AgreementOrder::SmallestFirst;
    }
};

void add_policy_flags(CLI::App* cmd, PolicyFlags& p)
{
    cmd->add_option("--fuse-min", p.min, "Minimum number of contracts fused into a session")->check(CLI::Range(2, 64));
    auto* t = cmd->add_flag("--terminating", p.terminating, "Only fuse sessions whose choreography terminates");
    auto* r = cmd->add_flag("--recursive", p.recursive, "Only fuse sessions whose choreography is recursive");
    t->excludes(r);
    cmd->add_flag("--smallest", p.smallest, "Prefer the smallest agreeing subset");
}

std::string sessions_summary(const Co2System& s)
{
    std::ostringstream out;
    if (s.sessions.empty()) out << "no sessions\n";
    for (const auto& [name, t] : s.sessions) {
        out << name << ": " << (is_terminated(t) ? "terminated" : "live");
        if (!is_terminated(t)) {
            out << ", culpable {";
            bool first = true;
            for (const auto& c : culpable(s, name)) {
                out << (first ? "" : ", ") << c;
                first = false;
            }
            out << "}";
        }
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json sessions_json(const Co2System& s)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, t] : s.sessions) {
        nlohmann::ordered_json e;
        e["terminated"] = is_terminated(t);
        e["culpable"] = culpable(s, name);
        e["contracts"] = render(t);
        j[name] = e;
    }
    return j;
}

int cmd_synth(const std::vector<std::string>& files, const std::string& format, const std::string& out)
{
    std::map<std::string, Contract> contracts;
    for (const auto& f : files) {
        auto parsed = parse_input(f, [](const std::string& t) { return parse_named_contracts(t); });
        for (auto& [p, c] : parsed) {
            if (contracts.count(p)) throw InputFailure{f, {}, "duplicate contract for " + p};
            contracts[p] = c;
        }
    }
    bool open = false;
    for (const auto& [p, c] : contracts) open = open || !free_participant_vars(c).empty();

    std::optional<GlobalType> global;
    std::map<std::string, std::string> pi;
    std::optional<SynthFailure> failure;
    if (open) {
        // Instantiate participant variables as an agreement among all of them.
        std::vector<LatentContract> pool;
        for (const auto& [p, c] : contracts) pool.push_back({p, SessionRef::var("x"), c});
        FusePolicy all;
        all.min_participants = std::max<std::size_t>(2, pool.size());
        if (auto a = find_agreement(pool, all)) {
            global = a->global;
            pi = a->pi;
        } else {
            failure = SynthFailure{SynthFailure::Kind::Stuck, "no instantiation of the participant variables agrees", {}};
        }
    } else {
        SynthResult r;
        try {
            r = synthesize(ContractSystem::with_empty_queues(contracts));
        } catch (const Error& e) {
            throw InputFailure{files.empty() ? "" : files.front(), {}, e.what()};
        }
        if (r.ok())
            global = r.global;
        else
            failure = r.failure;
    }

    if (format == "json") {
        nlohmann::ordered_json j;
        j["ok"] = global.has_value();
        if (global) {
            j["globalType"] = render(*global);
            j["ast"] = to_json(*global);
            if (open) j["pi"] = pi;
        } else {
            j["failure"] = to_string(failure->kind);
            j["detail"] = failure->detail;
            if (!failure->config.contracts.empty()) j["configuration"] = render(failure->config);
        }
        emit(out, j.dump(2) + "\n");
    } else if (global) {
        std::string text = render(*global) + "\n";
        if (open)
            for (const auto& [v, n] : pi) text += "# " + v + " := " + n + "\n";
        emit(out, text);
    } else {
        std::cerr << "synthesis failed: " << to_string(failure->kind);
        if (!failure->detail.empty()) std::cerr << ": " << failure->detail;
        std::cerr << "\n";
        if (!failure->config.contracts.empty()) std::cerr << "configuration: " << render(failure->config) << "\n";
    }
    return global ? Ok : SynthFailed;
}

Co2System load_system(const std::string& path, const PolicyFlags& policy)
{
    Co2System s = parse_input(path, [](const std::string& t) { return parse_system(t); });
    policy.apply(s);
    try {
        return normalize(s);
    } catch (const Error& e) {
        throw InputFailure{path, {}, e.what()};
    }
}

int cmd_run(const std::string& path, const SchedulerOptions& opts, const PolicyFlags& policy,
            const std::string& trace_path, const std::string& format)
{
    Co2System s = load_system(path, policy);
    Trace t = run(s, opts);
    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw InputFailure{trace_path, {}, "cannot write file"};
        write_trace(out, t.steps);
    }
    bool stuck = enabled_steps(t.terminal).empty();
    if (format == "json") {
        nlohmann::ordered_json j;
        j["steps"] = t.steps.size();
        j["stuck"] = stuck;
        j["sessions"] = sessions_json(t.terminal);
        j["finalDigest"] = digest_hex(state_digest(t.terminal));
        if (trace_path.empty()) {
            auto steps = nlohmann::ordered_json::array();
            for (const auto& st : t.steps) steps.push_back(to_json(st));
            j["trace"] = steps;
        }
        std::cout << j.dump(2) << "\n";
    } else {
        if (trace_path.empty()) write_trace(std::cout, t.steps);
        std::cout << "# " << t.steps.size() << " steps, " << (stuck ? "no step enabled" : "step limit reached") << "\n";
        std::istringstream lines(sessions_summary(t.terminal));
        for (std::string line; std::getline(lines, line);) std::cout << "# " << line << "\n";
    }
    return Ok;
}

int cmd_honesty(const std::string& path, const std::string& who, const HonestyLimits& limits, const PolicyFlags& policy,
                const std::string& witness_path, const std::string& format)
{
    Co2System s = load_system(path, policy);
    HonestyVerdict v = check_honesty(s, who, limits);
    bool bad = v.kind == HonestyVerdict::Kind::ViolationFound;
    if (bad && !witness_path.empty()) {
        std::ofstream out(witness_path);
        if (!out) throw InputFailure{witness_path, {}, "cannot write file"};
        write_trace(out, v.trace);
    }
    if (format == "json") {
        std::cout << to_json(v).dump(2) << "\n";
    } else if (bad) {
        std::cout << who << " is not honest: after " << v.trace.size() << " steps it is not ready";
        if (v.report) {
            std::cout << " in session " << v.report->session << "\n";
            std::cout << "  contract ready sets: {";
            bool first = true;
            for (const auto& x : v.report->contract_ready_sets) {
                std::cout << (first ? "" : ", ") << render(x);
                first = false;
            }
            std::cout << "}\n  process ready set:   " << render(v.report->process_ready_set) << "\n";
            std::cout << "  weak ready set:      " << render(v.report->weak_process_ready_set) << "\n";
        } else {
            std::cout << "\n";
        }
        if (witness_path.empty()) write_trace(std::cout, v.trace);
    } else {
        std::cout << "no violation for " << who << " up to " << v.states_explored << " states"
                  << (v.exhaustive ? " (state space exhausted)" : " (bound reached)");
        if (v.unknown_states) std::cout << ", readiness undecided in " << v.unknown_states << " states";
        std::cout << "\n";
    }
    return bad ? Violation : Ok;
}

int cmd_check(const std::string& trace_path, const std::string& system_path, const PolicyFlags& policy,
              const std::string& format)
{
    std::vector<TraceStep> steps = parse_input(trace_path, [](const std::string& t) {
        std::istringstream in(t);
        return read_trace(in);
    });
    Co2System s = load_system(system_path, policy);
    PropertyReport r = check_trace_properties(steps, s);
    if (format == "json") {
        std::cout << to_json(r).dump(2) << "\n";
    } else {
        std::cout << r.steps << " steps replayed\n";
        for (const auto& v : r.violations) {
            std::cout << "violation " << to_string(v.kind) << " at step " << v.step << " in " << v.session;
            if (!v.culpable.empty()) {
                std::cout << " (culpable:";
                for (const auto& c : v.culpable) std::cout << " " << c;
                std::cout << ")";
            }
            std::cout << ": " << v.detail << "\n";
        }
        if (r.ok()) std::cout << "no violations\n";
    }
    return r.ok() ? Ok : Violation;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Contract-oriented sessions: synthesis, execution and honesty analysis"};
    app.require_subcommand(1);
    std::string format = "text";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    std::vector<std::string> ctr_files;
    std::string out_path;
    auto* synth = app.add_subcommand("synth", "Synthesize a choreography from contracts");
    synth->add_option("files", ctr_files, "Contract files (NAME: contract per line)")->required();
    synth->add_option("-o,--output", out_path, "Write the result here");

    std::string system_path, trace_path, witness_path, participant;
    SchedulerOptions sched;
    HonestyLimits limits;
    PolicyFlags policy;

    auto* runc = app.add_subcommand("run", "Run a system with the seeded fair scheduler");
    runc->add_option("system", system_path, "System file")->required();
    runc->add_option("--seed", sched.seed, "Scheduler seed");
    runc->add_option("--max-steps", sched.max_steps, "Step limit");
    runc->add_option("--fairness-window", sched.fairness_window, "Rounds before a waiting step is forced");
    runc->add_option("--trace", trace_path, "Write the trace (JSON lines) here");
    add_policy_flags(runc, policy);

    auto* hon = app.add_subcommand("honesty", "Search for a run where a participant is not ready");
    hon->add_option("system", system_path, "System file")->required();
    hon->add_option("-p,--participant", participant, "Participant to check")->required();
    hon->add_option("--state-bound", limits.state_bound, "Maximum systems explored")->check(CLI::PositiveNumber);
    hon->add_option("--depth-bound", limits.depth_bound, "Maximum systems explored per readiness check")
        ->check(CLI::PositiveNumber);
    hon->add_option("--witness", witness_path, "Write the witness trace here");
    add_policy_flags(hon, policy);

    auto* chk = app.add_subcommand("check", "Replay a trace and check the calculus' properties on it");
    chk->add_option("trace", trace_path, "Trace file (JSON lines)")->required();
    chk->add_option("system", system_path, "System file the trace starts from")->required();
    add_policy_flags(chk, policy);

    for (auto* sub : {synth, runc, hon, chk})
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? Ok : InputError;
    }

    try {
        if (*synth) return cmd_synth(ctr_files, format, out_path);
        if (*runc) return cmd_run(system_path, sched, policy, trace_path, format);
        if (*hon) return cmd_honesty(system_path, participant, limits, policy, witness_path, format);
        if (*chk) return cmd_check(trace_path, system_path, policy, format);
    } catch (const InputFailure& f) {
        report(f);
        return InputError;
    } catch (const PreconditionError& e) {
        report({"", {}, e.what()});
        return Precondition;
    } catch (const ReplayError& e) {
        report({"", {}, e.what()});
        return Replay;
    } catch (const std::exception& e) {
        report({"", {}, e.what()});
        return InputError;
    }
    return Ok;
}
