#include "co2/runtime.hpp"

#include "co2/synthesis.hpp"
#include "co2/system_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <random>
#include <set>
#include <tuple>

namespace co2 {

bool policy_check(const GlobalType& g, const FusePolicy& policy)
{
    if (participants(g).size() < policy.min_participants) return false;
    switch (policy.mode) {
    case FuseMode::Plain: return true;
    case FuseMode::Terminating: return !has_recursion(g);
    case FuseMode::RecursiveOnly: return !has_end(g);
    }
    return false;
}

Prefix Prefix::tau() { return {}; }

Prefix Prefix::tell(PartRef target, std::string session_var, Contract c)
{
    Prefix p;
    p.kind = Kind::Tell;
    p.part = std::move(target);
    p.session = SessionRef::var(std::move(session_var));
    p.contract = std::move(c);
    return p;
}

Prefix Prefix::fuse(std::optional<FusePolicy> policy)
{
    Prefix p;
    p.kind = Kind::Fuse;
    p.policy = policy;
    return p;
}

Prefix Prefix::act(SessionRef session, PartRef peer, Sort sort, Dir dir)
{
    Prefix p;
    p.kind = Kind::Do;
    p.session = std::move(session);
    p.part = std::move(peer);
    p.sort = std::move(sort);
    p.dir = dir;
    return p;
}

struct Process::Node {
    Kind kind = Kind::Nil;
    std::vector<SumBranch> branches;
    std::vector<Process> parts;  // Par parts; [body] for Delim
    std::vector<std::string> svars, pvars;
    std::string name;
    std::vector<SessionRef> sargs;
    std::vector<PartRef> pargs;
};

Process::Process()
{
    static const auto nil_node = std::make_shared<const Node>();
    node_ = nil_node;
}

Process::Process(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Process Process::nil() { return Process(); }

Process Process::sum(std::vector<SumBranch> branches)
{
    if (branches.empty()) throw Error("a sum needs at least one branch");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sum;
    n->branches = std::move(branches);
    return Process(std::move(n));
}

Process Process::prefixed(Prefix p, Process cont) { return sum({{std::move(p), std::move(cont)}}); }

Process Process::par(std::vector<Process> parts)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Par;
    n->parts = std::move(parts);
    return Process(std::move(n));
}

Process Process::delim(std::vector<std::string> session_vars, std::vector<std::string> part_vars, Process body)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Delim;
    n->svars = std::move(session_vars);
    n->pvars = std::move(part_vars);
    n->parts.push_back(std::move(body));
    return Process(std::move(n));
}

Process Process::call(std::string name, std::vector<SessionRef> session_args, std::vector<PartRef> part_args)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->name = std::move(name);
    n->sargs = std::move(session_args);
    n->pargs = std::move(part_args);
    return Process(std::move(n));
}

Process::Kind Process::kind() const { return node_->kind; }
const std::vector<SumBranch>& Process::branches() const { return node_->branches; }
const std::vector<Process>& Process::parts() const { return node_->parts; }
const std::vector<std::string>& Process::session_vars() const { return node_->svars; }
const std::vector<std::string>& Process::part_vars() const { return node_->pvars; }
const Process& Process::body() const { return node_->parts.front(); }
const std::string& Process::callee() const { return node_->name; }
const std::vector<SessionRef>& Process::session_args() const { return node_->sargs; }
const std::vector<PartRef>& Process::part_args() const { return node_->pargs; }

std::strong_ordering operator<=>(const Process& a, const Process& b)
{
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    return std::tie(x.kind, x.branches, x.parts, x.svars, x.pvars, x.name, x.sargs, x.pargs) <=>
           std::tie(y.kind, y.branches, y.parts, y.svars, y.pvars, y.name, y.sargs, y.pargs);
}

bool operator==(const Process& a, const Process& b) { return (a <=> b) == 0; }

namespace {

struct Subst {
    std::map<std::string, SessionRef> sessions;
    std::map<std::string, PartRef> parts;

    bool empty() const { return sessions.empty() && parts.empty(); }
};

SessionRef apply(const Subst& s, const SessionRef& r)
{
    if (r.is_name()) return r;
    auto it = s.sessions.find(r.id);
    return it == s.sessions.end() ? r : it->second;
}

PartRef apply(const Subst& s, const PartRef& r)
{
    if (r.is_name()) return r;
    auto it = s.parts.find(r.id);
    return it == s.parts.end() ? r : it->second;
}

Contract apply(const Subst& s, const Contract& c) { return s.parts.empty() ? c : substitute_parts(c, s.parts); }

Process apply(const Subst& s, const Process& p);

Prefix apply(const Subst& s, Prefix p)
{
    p.part = apply(s, p.part);
    p.session = apply(s, p.session);
    if (p.kind == Prefix::Kind::Tell) p.contract = apply(s, p.contract);
    return p;
}

Process apply(const Subst& s, const Process& p)
{
    if (s.empty()) return p;
    switch (p.kind()) {
    case Process::Kind::Nil:
        return p;
    case Process::Kind::Sum: {
        std::vector<SumBranch> out;
        for (const auto& b : p.branches()) out.push_back({apply(s, b.prefix), apply(s, b.cont)});
        return Process::sum(std::move(out));
    }
    case Process::Kind::Par: {
        std::vector<Process> out;
        for (const auto& q : p.parts()) out.push_back(apply(s, q));
        return Process::par(std::move(out));
    }
    case Process::Kind::Delim: {
        Subst inner = s;
        for (const auto& v : p.session_vars()) inner.sessions.erase(v);
        for (const auto& v : p.part_vars()) inner.parts.erase(v);
        return Process::delim(p.session_vars(), p.part_vars(), apply(inner, p.body()));
    }
    case Process::Kind::Call: {
        std::vector<SessionRef> sargs;
        std::vector<PartRef> pargs;
        for (const auto& r : p.session_args()) sargs.push_back(apply(s, r));
        for (const auto& r : p.part_args()) pargs.push_back(apply(s, r));
        return Process::call(p.callee(), std::move(sargs), std::move(pargs));
    }
    }
    return p;
}

LatentContract apply(const Subst& s, const LatentContract& l)
{
    return {l.promiser, apply(s, l.session), apply(s, l.contract)};
}

std::string base_name(const std::string& id) { return id.substr(0, id.find('#')); }

// Appends the threads of p to out, renaming delimited variables apart.
void flatten_into(const Process& p, std::vector<Process>& out, std::uint64_t& fresh)
{
    switch (p.kind()) {
    case Process::Kind::Nil:
        return;
    case Process::Kind::Par:
        for (const auto& q : p.parts()) flatten_into(q, out, fresh);
        return;
    case Process::Kind::Delim: {
        Subst s;
        for (const auto& v : p.session_vars()) s.sessions[v] = SessionRef::var(base_name(v) + "#" + std::to_string(fresh++));
        for (const auto& v : p.part_vars()) s.parts[v] = PartRef::var(base_name(v) + "#" + std::to_string(fresh++));
        flatten_into(apply(s, p.body()), out, fresh);
        return;
    }
    default:
        out.push_back(p);
    }
}

void check_calls(const Process& p, const std::map<std::string, Definition>& defs)
{
    switch (p.kind()) {
    case Process::Kind::Sum:
        for (const auto& b : p.branches()) check_calls(b.cont, defs);
        return;
    case Process::Kind::Par:
    case Process::Kind::Delim:
        for (const auto& q : p.parts()) check_calls(q, defs);
        return;
    case Process::Kind::Call: {
        auto it = defs.find(p.callee());
        if (it == defs.end()) throw Error("call to unknown definition " + p.callee());
        if (it->second.session_params.size() != p.session_args().size() ||
            it->second.part_params.size() != p.part_args().size())
            throw Error("arity mismatch in call to " + p.callee());
        return;
    }
    case Process::Kind::Nil:
        return;
    }
}

std::string fresh_session_name(const Co2System& s)
{
    for (std::size_t k = 1;; ++k) {
        std::string name = "s" + std::to_string(k);
        if (!s.sessions.count(name)) return name;
    }
}

bool move_enabled(const Co2System& s, const std::string& actor, const Prefix& p)
{
    if (!p.session.is_name() || !p.part.is_name()) return false;
    auto it = s.sessions.find(p.session.id);
    if (it == s.sessions.end()) return false;
    MoveLabel m{actor, p.part.id, p.sort, p.dir};
    auto moves = enabled_moves(it->second);
    return std::find(moves.begin(), moves.end(), m) != moves.end();
}

FusePolicy effective_policy(const Co2System& s, const Prefix& p) { return p.policy.value_or(s.default_policy); }

bool branch_enabled(const Co2System& s, const std::string& actor, const Prefix& p)
{
    switch (p.kind) {
    case Prefix::Kind::Tau:
        return true;
    case Prefix::Kind::Tell:
        return p.part.is_name() && !p.session.is_name();
    case Prefix::Kind::Do:
        return move_enabled(s, actor, p);
    case Prefix::Kind::Fuse: {
        auto pool = s.pools.find(actor);
        if (pool == s.pools.end()) return false;
        return find_agreement(pool->second, effective_policy(s, p), s.order).has_value();
    }
    }
    return false;
}

StepKind step_kind(Prefix::Kind k)
{
    switch (k) {
    case Prefix::Kind::Tau: return StepKind::Tau;
    case Prefix::Kind::Tell: return StepKind::Tell;
    case Prefix::Kind::Fuse: return StepKind::Fuse;
    case Prefix::Kind::Do: return StepKind::Do;
    }
    return StepKind::Tau;
}

struct AgreementKey {
    std::vector<LatentContract> pool;
    FusePolicy policy;
    AgreementOrder order;

    auto operator<=>(const AgreementKey&) const = default;
};

std::optional<Agreement> search_agreement(const std::vector<LatentContract>& pool, const FusePolicy& policy,
                                          AgreementOrder order)
{
    const std::size_t n = pool.size();
    if (n > 16) throw Error("pool too large for agreement search");
    const std::size_t min_size = std::max<std::size_t>(2, policy.min_participants);

    struct Candidate {
        std::vector<std::size_t> members;
        std::vector<std::string> promisers;
    };
    std::vector<Candidate> subsets;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        Candidate c;
        std::set<std::string> seen;
        bool distinct = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask & (1u << i))) continue;
            c.members.push_back(i);
            distinct = distinct && seen.insert(pool[i].promiser).second;
        }
        if (!distinct || c.members.size() < min_size) continue;
        c.promisers.assign(seen.begin(), seen.end());
        subsets.push_back(std::move(c));
    }
    std::sort(subsets.begin(), subsets.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.members.size() != b.members.size())
            return order == AgreementOrder::LargestFirst ? a.members.size() > b.members.size()
                                                         : a.members.size() < b.members.size();
        return std::tie(a.promisers, a.members) < std::tie(b.promisers, b.members);
    });

    for (const auto& cand : subsets) {
        // Candidate names for each participant variable: the promisers of the
        // subset, except those whose own contract mentions the variable.
        std::map<std::string, std::vector<std::string>> choices;
        for (std::size_t i : cand.members)
            for (const auto& v : free_participant_vars(pool[i].contract)) choices[v];
        bool feasible = true;
        for (auto& [v, names] : choices) {
            for (const auto& p : cand.promisers) {
                bool own = false;
                for (std::size_t i : cand.members)
                    if (pool[i].promiser == p && free_participant_vars(pool[i].contract).count(v)) own = true;
                if (!own) names.push_back(p);
            }
            if (names.empty()) feasible = false;
        }
        if (!feasible) continue;
        bool names_ok = true;
        for (std::size_t i : cand.members)
            for (const auto& nm : participant_names(pool[i].contract))
                if (!std::binary_search(cand.promisers.begin(), cand.promisers.end(), nm)) names_ok = false;
        if (!names_ok) continue;

        std::vector<std::string> vars;
        for (const auto& [v, _] : choices) vars.push_back(v);
        std::vector<std::size_t> pick(vars.size(), 0);
        for (bool done = false; !done;) {
            std::map<std::string, PartRef> pi;
            for (std::size_t k = 0; k < vars.size(); ++k) pi[vars[k]] = PartRef::name(choices[vars[k]][pick[k]]);
            std::map<std::string, Contract> contracts;
            for (std::size_t i : cand.members) contracts[pool[i].promiser] = substitute_parts(pool[i].contract, pi);

            // Whoever a participant talks to must talk back to it.
            bool symmetric = true;
            for (const auto& [p, c] : contracts)
                for (const auto& q : participant_names(c))
                    if (!participant_names(contracts.at(q)).count(p)) symmetric = false;
            if (symmetric) {
                auto t = ContractSystem::with_empty_queues(contracts);
                auto r = synthesize(t);
                if (r.ok() && policy_check(*r.global, policy)) {
                    Agreement a;
                    a.members = cand.members;
                    for (const auto& [v, ref] : pi) a.pi[v] = ref.id;
                    a.contracts = std::move(t);
                    a.global = *r.global;
                    return a;
                }
            }

            done = true;
            for (std::size_t k = vars.size(); k-- > 0;) {
                if (++pick[k] < choices[vars[k]].size()) {
                    done = false;
                    break;
                }
                pick[k] = 0;
            }
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<Agreement> find_agreement(const std::vector<LatentContract>& pool, const FusePolicy& policy,
                                        AgreementOrder order)
{
    static std::mutex mutex;
    static std::map<AgreementKey, std::optional<Agreement>> cache;
    AgreementKey key{pool, policy, order};
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto result = search_agreement(pool, policy, order);
    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace(std::move(key), result);
    return result;
}

Co2System normalize(const Co2System& s)
{
    Co2System out = s;
    for (const auto& [name, def] : s.definitions) check_calls(def.body, s.definitions);
    for (auto& [actor, threads] : out.processes) {
        std::vector<Process> flat;
        for (const auto& p : threads) {
            check_calls(p, s.definitions);
            flatten_into(p, flat, out.fresh);
        }
        threads = std::move(flat);
    }
    return out;
}

const char* to_string(StepKind k)
{
    switch (k) {
    case StepKind::Tell: return "tell";
    case StepKind::Fuse: return "fuse";
    case StepKind::Do: return "do";
    case StepKind::Tau: return "tau";
    case StepKind::Call: return "call";
    }
    return "?";
}

std::vector<StepRef> enabled_steps(const Co2System& s)
{
    std::vector<StepRef> out;
    for (const auto& [actor, threads] : s.processes) {
        for (std::size_t t = 0; t < threads.size(); ++t) {
            const Process& p = threads[t];
            if (p.kind() == Process::Kind::Call) {
                if (s.definitions.count(p.callee())) out.push_back({actor, t, 0, StepKind::Call});
                continue;
            }
            if (p.kind() != Process::Kind::Sum) continue;
            for (std::size_t b = 0; b < p.branches().size(); ++b) {
                const Prefix& pre = p.branches()[b].prefix;
                if (branch_enabled(s, actor, pre)) out.push_back({actor, t, b, step_kind(pre.kind)});
            }
        }
    }
    return out;
}

std::pair<Co2System, StepLabel> fire(const Co2System& s, const StepRef& step)
{
    auto pit = s.processes.find(step.actor);
    if (pit == s.processes.end() || step.thread >= pit->second.size())
        throw Error("no such thread for " + step.actor);
    const Process thread = pit->second[step.thread];

    Co2System next = s;
    auto replace_thread = [&](const Process& with) {
        std::vector<Process> spliced;
        flatten_into(with, spliced, next.fresh);
        auto& threads = next.processes[step.actor];
        threads.erase(threads.begin() + static_cast<std::ptrdiff_t>(step.thread));
        threads.insert(threads.begin() + static_cast<std::ptrdiff_t>(step.thread), spliced.begin(), spliced.end());
    };

    StepLabel label;
    label.actor = step.actor;
    label.kind = step.kind;

    if (step.kind == StepKind::Call) {
        if (thread.kind() != Process::Kind::Call) throw Error("step is not enabled");
        auto dit = s.definitions.find(thread.callee());
        if (dit == s.definitions.end()) throw Error("call to unknown definition " + thread.callee());
        const Definition& def = dit->second;
        if (def.session_params.size() != thread.session_args().size() ||
            def.part_params.size() != thread.part_args().size())
            throw Error("arity mismatch in call to " + thread.callee());
        Subst sub;
        for (std::size_t i = 0; i < def.session_params.size(); ++i)
            sub.sessions[def.session_params[i]] = thread.session_args()[i];
        for (std::size_t i = 0; i < def.part_params.size(); ++i) sub.parts[def.part_params[i]] = thread.part_args()[i];
        label.callee = thread.callee();
        replace_thread(apply(sub, def.body));
        return {std::move(next), std::move(label)};
    }

    if (thread.kind() != Process::Kind::Sum || step.branch >= thread.branches().size())
        throw Error("step is not enabled");
    const SumBranch& br = thread.branches()[step.branch];
    if (step_kind(br.prefix.kind) != step.kind || !branch_enabled(s, step.actor, br.prefix))
        throw Error("step is not enabled");
    label.prefix = br.prefix;
    replace_thread(br.cont);

    switch (br.prefix.kind) {
    case Prefix::Kind::Tau:
        break;
    case Prefix::Kind::Tell:
        next.pools[br.prefix.part.id].push_back({step.actor, br.prefix.session, br.prefix.contract});
        break;
    case Prefix::Kind::Do: {
        label.session = br.prefix.session.id;
        auto& session = next.sessions.at(br.prefix.session.id);
        session = contract_step(session, {step.actor, br.prefix.part.id, br.prefix.sort, br.prefix.dir});
        break;
    }
    case Prefix::Kind::Fuse: {
        auto& pool = next.pools.at(step.actor);
        auto agreement = find_agreement(pool, effective_policy(s, br.prefix), s.order);
        if (!agreement) throw Error("step is not enabled");
        std::string name = fresh_session_name(next);

        FuseReport report;
        report.session = name;
        report.global = agreement->global;
        report.pi = agreement->pi;
        Subst sub;
        for (std::size_t i : agreement->members) {
            report.participants.push_back(pool[i].promiser);
            report.sigma[pool[i].session.id] = name;
            sub.sessions[pool[i].session.id] = SessionRef::name(name);
        }
        std::sort(report.participants.begin(), report.participants.end());
        for (const auto& [v, p] : agreement->pi) sub.parts[v] = PartRef::name(p);

        for (auto it = agreement->members.rbegin(); it != agreement->members.rend(); ++it)
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(*it));
        for (auto& [actor, threads] : next.processes)
            for (auto& p : threads) p = apply(sub, p);
        for (auto& [host, latent] : next.pools)
            for (auto& l : latent) l = apply(sub, l);
        next.sessions[name] = agreement->contracts;
        label.session = name;
        label.fuse = std::move(report);
        break;
    }
    }
    return {std::move(next), std::move(label)};
}

namespace {

std::pair<Co2System, StepLabel> fire_checked(const Co2System& s, StepRef ref)
{
    auto steps = enabled_steps(s);
    if (std::find(steps.begin(), steps.end(), ref) == steps.end())
        throw Error(std::string(to_string(ref.kind)) + " step of " + ref.actor + " is not enabled");
    return fire(s, ref);
}

}  // namespace

std::pair<Co2System, StepLabel> reduce_tell(const Co2System& s, const std::string& actor, std::size_t thread,
                                            std::size_t branch)
{
    return fire_checked(s, {actor, thread, branch, StepKind::Tell});
}

std::pair<Co2System, StepLabel> reduce_fuse(const Co2System& s, const std::string& actor, std::size_t thread,
                                            std::size_t branch)
{
    return fire_checked(s, {actor, thread, branch, StepKind::Fuse});
}

std::pair<Co2System, StepLabel> reduce_do(const Co2System& s, const std::string& actor, std::size_t thread,
                                          std::size_t branch)
{
    return fire_checked(s, {actor, thread, branch, StepKind::Do});
}

std::pair<Co2System, StepLabel> reduce_tau(const Co2System& s, const std::string& actor, std::size_t thread,
                                           std::size_t branch)
{
    return fire_checked(s, {actor, thread, branch, StepKind::Tau});
}

std::pair<Co2System, StepLabel> reduce_call(const Co2System& s, const std::string& actor, std::size_t thread)
{
    return fire_checked(s, {actor, thread, 0, StepKind::Call});
}

std::string serialize(const Co2System& s) { return render_system(s) + "# fresh " + std::to_string(s.fresh) + "\n"; }

std::uint64_t state_digest(const Co2System& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : serialize(s)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string digest_hex(std::uint64_t d)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

std::string exploration_key(const Co2System& s)
{
    std::string text = render_system(s);
    std::string out;
    std::map<std::string, std::string> renamed;
    auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '#'; };
    for (std::size_t i = 0; i < text.size();) {
        if (!ident(text[i])) {
            out += text[i++];
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && ident(text[j])) ++j;
        std::string word = text.substr(i, j - i);
        if (word.find('#') != std::string::npos) {
            auto [it, fresh] = renamed.emplace(word, "#" + std::to_string(renamed.size()));
            word = it->second;
        }
        out += word;
        i = j;
    }
    return out;
}

namespace {

std::string step_identity(const Co2System& s, const StepRef& r)
{
    return r.actor + "|" + render(s.processes.at(r.actor)[r.thread]) + "|" + std::to_string(r.branch);
}

}  // namespace

Trace run(const Co2System& s, const SchedulerOptions& options)
{
    Trace trace;
    Co2System cur = normalize(s);
    std::mt19937_64 rng(options.seed);
    std::map<std::string, std::size_t> enabled_since;
    for (std::size_t round = 0; round < options.max_steps; ++round) {
        auto steps = enabled_steps(cur);
        if (steps.empty()) break;

        std::map<std::string, std::size_t> since;
        std::size_t oldest = 0;
        std::size_t oldest_round = round;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            std::string id = step_identity(cur, steps[i]);
            auto it = enabled_since.find(id);
            std::size_t first = it == enabled_since.end() ? round : it->second;
            since.emplace(id, first);
            if (first < oldest_round) {
                oldest_round = first;
                oldest = i;
            }
        }
        enabled_since = std::move(since);

        std::size_t chosen;
        if (options.fairness_window > 0 && round - oldest_round + 1 >= options.fairness_window)
            chosen = oldest;
        else
            chosen = std::uniform_int_distribution<std::size_t>(0, steps.size() - 1)(rng);

        auto [next, label] = fire(cur, steps[chosen]);
        cur = std::move(next);
        trace.steps.push_back({trace.steps.size(), std::move(label), digest_hex(state_digest(cur))});
    }
    trace.terminal = std::move(cur);
    return trace;
}

bool same_step(const StepLabel& a, const StepLabel& b)
{
    if (a.actor != b.actor || a.kind != b.kind || a.session != b.session) return false;
    switch (a.kind) {
    case StepKind::Tau:
        return true;
    case StepKind::Call:
        return a.callee == b.callee;
    case StepKind::Tell:
        return a.prefix.part == b.prefix.part && a.prefix.contract == b.prefix.contract;
    case StepKind::Do:
        return a.prefix.part == b.prefix.part && a.prefix.sort == b.prefix.sort && a.prefix.dir == b.prefix.dir;
    case StepKind::Fuse:
        if (!a.fuse || !b.fuse) return a.fuse.has_value() == b.fuse.has_value();
        return a.fuse->participants == b.fuse->participants && a.fuse->global == b.fuse->global;
    }
    return false;
}

std::vector<Co2System> replay(const Co2System& s, const std::vector<TraceStep>& steps)
{
    std::vector<Co2System> states{normalize(s)};
    for (const auto& rec : steps) {
        const Co2System& cur = states.back();
        bool matched = false;
        for (const auto& ref : enabled_steps(cur)) {
            if (ref.actor != rec.label.actor || ref.kind != rec.label.kind) continue;
            auto [next, label] = fire(cur, ref);
            if (!same_step(label, rec.label) || digest_hex(state_digest(next)) != rec.digest) continue;
            states.push_back(std::move(next));
            matched = true;
            break;
        }
        if (!matched)
            throw ReplayError("trace diverges at step " + std::to_string(rec.index) + " (" + rec.label.actor + " " +
                              to_string(rec.label.kind) + ")");
    }
    return states;
}

}  // namespace co2
