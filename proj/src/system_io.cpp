#include "co2/system_io.hpp"

#include "lexer.hpp"

#include <set>
#include <sstream>

namespace co2 {

using namespace detail;

namespace {

bool is_keyword(const Token& t)
{
    static const std::set<std::string> words{"tau", "tell", "fuse", "do"};
    return t.kind == Tok::Ident && words.count(t.text);
}

class SystemParser {
public:
    explicit SystemParser(std::string_view text) : in_(tokenize(text)) {}

    Co2System parse()
    {
        while (!in_.at(Tok::Eof)) item();
        resolve_sessions();
        check_free_uses();
        return std::move(sys_);
    }

private:
    Cursor in_;
    Co2System sys_;
    std::map<std::string, Span> participant_spans_;

    // Variables bound by enclosing delimitations and definitions.
    std::multiset<std::string> scope_;
    struct Use {
        std::string id;
        bool session;
        Span span;
    };
    std::vector<Use> free_uses_;
    std::set<std::string> told_sessions_, told_parts_;

    struct Scope {
        std::multiset<std::string>& set;
        std::vector<std::multiset<std::string>::iterator> added;
        Scope(std::multiset<std::string>& s, const std::vector<std::string>& a, const std::vector<std::string>& b)
            : set(s)
        {
            for (const auto& v : a) added.push_back(set.insert(v));
            for (const auto& v : b) added.push_back(set.insert(v));
        }
        ~Scope()
        {
            for (auto it : added) set.erase(it);
        }
    };

    void use(const std::string& id, bool session, const Span& span)
    {
        if (!scope_.count(id)) free_uses_.push_back({id, session, span});
    }

    void note_contract(const Contract& c)
    {
        auto vs = free_participant_vars(c);
        told_parts_.insert(vs.begin(), vs.end());
    }

    // Free variables must be connected to an advertised contract: session
    // variables to a tell or pool entry, participant variables to a
    // contract mentioning them.
    void check_free_uses()
    {
        for (const auto& u : free_uses_) {
            if (u.session) {
                if (sys_.sessions.count(u.id) || told_sessions_.count(u.id)) continue;
                in_.fail("session variable " + u.id + " is not bound and no contract is told on it", u.span);
            }
            if (!told_parts_.count(u.id))
                in_.fail("participant variable " + u.id + " is not bound and occurs in no advertised contract", u.span);
        }
    }

    const Token& name(std::string_view what)
    {
        const Token& t = in_.expect(Tok::Ident, what);
        if (!is_upper_ident(t)) in_.fail(std::string(what) + " must start with an upper-case letter", t.span);
        return t;
    }

    const Token& variable(std::string_view what)
    {
        const Token& t = in_.expect(Tok::Ident, what);
        if (!is_lower_ident(t)) in_.fail(std::string(what) + " must start with a lower-case letter", t.span);
        return t;
    }

    PartRef part()
    {
        const Token& t = in_.expect(Tok::Ident, "participant");
        if (is_upper_ident(t)) return PartRef::name(t.text);
        use(t.text, false, t.span);
        return PartRef::var(t.text);
    }

    void item()
    {
        if (in_.at_word("def")) return definition();
        if (in_.at_word("participant")) return participant();
        if (in_.at_word("session")) return session();
        if (in_.at_word("pool")) return pool();
        if (in_.at_word("policy")) return policy_block();
        in_.fail("expected 'def', 'participant', 'session', 'pool' or 'policy'");
    }

    // "(" vars (";" vars)? ")"
    std::pair<std::vector<std::string>, std::vector<std::string>> var_lists()
    {
        std::pair<std::vector<std::string>, std::vector<std::string>> out;
        in_.expect(Tok::LParen, "'('");
        auto list = [&](std::vector<std::string>& into) {
            if (!in_.at(Tok::Ident)) return;
            into.push_back(variable("variable").text);
            while (in_.accept(Tok::Comma)) into.push_back(variable("variable").text);
        };
        list(out.first);
        if (in_.accept(Tok::Semi)) list(out.second);
        in_.expect(Tok::RParen, "')'");
        return out;
    }

    void definition()
    {
        in_.next();
        const Token& n = name("definition name");
        if (sys_.definitions.count(n.text)) in_.fail("duplicate definition " + n.text, n.span);
        auto [svars, pvars] = var_lists();
        in_.expect(Tok::Equals, "'='");
        Scope bound(scope_, svars, pvars);
        Process body = process();
        sys_.definitions[n.text] = Definition{svars, pvars, body};
    }

    void participant()
    {
        in_.next();
        const Token& n = name("participant name");
        if (sys_.processes.count(n.text)) in_.fail("duplicate participant " + n.text, n.span);
        in_.expect(Tok::LBrace, "'{'");
        Process p = process();
        in_.expect(Tok::RBrace, "'}'");
        sys_.processes[n.text] = {p};
        participant_spans_[n.text] = n.span;
    }

    void session()
    {
        in_.next();
        const Token& n = in_.expect(Tok::Ident, "session name");
        if (sys_.sessions.count(n.text)) in_.fail("duplicate session " + n.text, n.span);
        in_.expect(Tok::LBrace, "'{'");
        std::map<std::string, Contract> contracts;
        std::map<Channel, std::vector<Sort>> queues;
        while (!in_.at(Tok::RBrace)) {
            if (in_.at_word("queue")) {
                in_.next();
                const Token& from = name("participant name");
                in_.expect(Tok::Arrow, "'->'");
                const Token& to = name("participant name");
                in_.expect(Tok::Colon, "':'");
                in_.expect(Tok::LBracket, "'['");
                std::vector<Sort> msgs;
                if (!in_.at(Tok::RBracket)) {
                    msgs.push_back({in_.expect(Tok::Ident, "sort").text});
                    while (in_.accept(Tok::Comma)) msgs.push_back({in_.expect(Tok::Ident, "sort").text});
                }
                in_.expect(Tok::RBracket, "']'");
                if (queues.count({from.text, to.text})) in_.fail("duplicate queue", from.span);
                queues[{from.text, to.text}] = std::move(msgs);
            } else {
                const Token& p = name("participant name");
                if (contracts.count(p.text)) in_.fail("duplicate contract for " + p.text, p.span);
                in_.expect(Tok::Colon, "':'");
                Span start = in_.peek().span;
                Contract c = parse_contract_expr(in_);
                check_contract(c, join(start, in_.peek().span), in_);
                if (!free_participant_vars(c).empty())
                    in_.fail("contracts in a session must not contain participant variables", start);
                contracts[p.text] = c;
            }
            in_.accept(Tok::Semi);
        }
        in_.expect(Tok::RBrace, "'}'");
        ContractSystem t = ContractSystem::with_empty_queues(contracts);
        for (auto& [ch, q] : queues) {
            if (!t.queues.count(ch)) in_.fail("queue " + ch.first + " -> " + ch.second + " is not between session members", n.span);
            t.queues[ch] = std::move(q);
        }
        sys_.sessions[n.text] = std::move(t);
    }

    void pool()
    {
        in_.next();
        const Token& host = name("participant name");
        in_.expect(Tok::LBrace, "'{'");
        auto& entries = sys_.pools[host.text];
        while (!in_.at(Tok::RBrace)) {
            const Token& var = variable("session variable");
            in_.expect(Tok::Colon, "':'");
            const Token& promiser = name("participant name");
            in_.expect_word("says");
            Span start = in_.peek().span;
            Contract c = parse_contract_expr(in_);
            check_contract(c, join(start, in_.peek().span), in_);
            told_sessions_.insert(var.text);
            note_contract(c);
            entries.push_back({promiser.text, SessionRef::var(var.text), c});
            in_.accept(Tok::Semi);
        }
        in_.expect(Tok::RBrace, "'}'");
    }

    // Comma-separated fuse options; `allow_order` admits "smallest".
    FusePolicy fuse_options(bool allow_order)
    {
        FusePolicy p;
        bool mode_set = false;
        do {
            const Token& opt = in_.expect(Tok::Ident, "fuse option");
            if (opt.text == "min") {
                in_.expect(Tok::Equals, "'='");
                const Token& num = in_.expect(Tok::Number, "participant count");
                p.min_participants = std::stoul(num.text);
                if (p.min_participants < 2) in_.fail("min must be at least 2", num.span);
            } else if (opt.text == "terminating" || opt.text == "recursive") {
                if (mode_set) in_.fail("at most one of 'terminating' and 'recursive'", opt.span);
                mode_set = true;
                p.mode = opt.text == "terminating" ? FuseMode::Terminating : FuseMode::RecursiveOnly;
            } else if (allow_order && (opt.text == "smallest" || opt.text == "largest")) {
                sys_.order = opt.text == "smallest" ? AgreementOrder::SmallestFirst : AgreementOrder::LargestFirst;
            } else {
                in_.fail("unknown fuse option '" + opt.text + "'", opt.span);
            }
        } while (in_.accept(Tok::Comma));
        return p;
    }

    void policy_block()
    {
        in_.next();
        in_.expect(Tok::LBrace, "'{'");
        if (!in_.at(Tok::RBrace)) sys_.default_policy = fuse_options(true);
        in_.expect(Tok::RBrace, "'}'");
    }

    Process process()
    {
        std::vector<Process> parts{sum()};
        while (in_.accept(Tok::Bar)) parts.push_back(sum());
        return parts.size() == 1 ? parts.front() : Process::par(std::move(parts));
    }

    Process sum()
    {
        Span start = in_.peek().span;
        Process first = prefixed();
        if (!in_.at(Tok::Plus)) return first;
        std::vector<SumBranch> branches;
        auto add = [&](const Process& p, const Span& span) {
            if (p.kind() != Process::Kind::Sum) in_.fail("only prefixed processes can be summed", span);
            branches.insert(branches.end(), p.branches().begin(), p.branches().end());
        };
        add(first, start);
        while (in_.accept(Tok::Plus)) {
            Span s = in_.peek().span;
            add(prefixed(), s);
        }
        return Process::sum(std::move(branches));
    }

    bool at_prefix() const { return is_keyword(in_.peek()); }

    Process prefixed()
    {
        if (!at_prefix()) return unit();
        Prefix p = prefix();
        Process cont;
        if (in_.accept(Tok::Dot)) cont = unit();
        return Process::prefixed(std::move(p), std::move(cont));
    }

    bool at_delim() const
    {
        if (!in_.at(Tok::LParen)) return false;
        if (in_.at(Tok::Semi, 1) || in_.at(Tok::RParen, 1)) return true;
        const Token& t = in_.peek(1);
        if (!is_lower_ident(t) || is_keyword(t)) return false;
        return in_.at(Tok::Comma, 2) || in_.at(Tok::Semi, 2) || in_.at(Tok::RParen, 2);
    }

    Process unit()
    {
        if (in_.at(Tok::Number)) {
            const Token& t = in_.next();
            if (t.text != "0") in_.fail("expected '0'", t.span);
            return Process::nil();
        }
        if (at_delim()) {
            auto [svars, pvars] = var_lists();
            Scope bound(scope_, svars, pvars);
            Process body = unit();
            return Process::delim(std::move(svars), std::move(pvars), std::move(body));
        }
        if (in_.accept(Tok::LParen)) {
            Process p = process();
            in_.expect(Tok::RParen, "')'");
            return p;
        }
        if (at_prefix()) return prefixed();
        if (is_upper_ident(in_.peek()) && in_.at(Tok::LParen, 1)) return call();
        in_.fail("expected a process");
    }

    Process call()
    {
        const Token& n = in_.next();
        in_.expect(Tok::LParen, "'('");
        std::vector<SessionRef> sargs;
        std::vector<PartRef> pargs;
        auto session_arg = [&] {
            const Token& t = in_.expect(Tok::Ident, "session");
            use(t.text, true, t.span);
            sargs.push_back(SessionRef::var(t.text));
        };
        if (in_.at(Tok::Ident)) {
            session_arg();
            while (in_.accept(Tok::Comma)) session_arg();
        }
        if (in_.accept(Tok::Semi) && in_.at(Tok::Ident)) {
            pargs.push_back(part());
            while (in_.accept(Tok::Comma)) pargs.push_back(part());
        }
        in_.expect(Tok::RParen, "')'");
        calls_.push_back({n.text, sargs.size(), pargs.size(), n.span});
        return Process::call(n.text, std::move(sargs), std::move(pargs));
    }

    Prefix prefix()
    {
        const Token& kw = in_.next();
        if (kw.text == "tau") return Prefix::tau();
        if (kw.text == "tell") {
            PartRef target = part();
            in_.expect(Tok::At, "'@'");
            const Token& var = variable("session variable");
            in_.expect(Tok::LBrace, "'{'");
            Span start = in_.peek().span;
            Contract c = parse_contract_expr(in_);
            check_contract(c, join(start, in_.peek().span), in_);
            in_.expect(Tok::RBrace, "'}'");
            told_sessions_.insert(var.text);
            note_contract(c);
            return Prefix::tell(std::move(target), var.text, std::move(c));
        }
        if (kw.text == "fuse") {
            std::optional<FusePolicy> policy;
            if (in_.accept(Tok::LParen)) {
                policy = fuse_options(false);
                in_.expect(Tok::RParen, "')'");
            }
            return Prefix::fuse(policy);
        }
        const Token& session = in_.expect(Tok::Ident, "session");
        use(session.text, true, session.span);
        PartRef peer = part();
        bool send = in_.at(Tok::Bang);
        if (!in_.accept(Tok::Bang) && !in_.accept(Tok::Query)) in_.fail("expected '!' or '?'");
        const Token& sort = in_.expect(Tok::Ident, "sort");
        return Prefix::act(SessionRef::var(session.text), std::move(peer), Sort{sort.text}, send ? Dir::Send : Dir::Recv);
    }

    struct CallSite {
        std::string name;
        std::size_t sessions, parts;
        Span span;
    };
    std::vector<CallSite> calls_;

    SessionRef resolve(const SessionRef& r, const std::set<std::string>& bound) const
    {
        if (!r.is_name() && !bound.count(r.id) && sys_.sessions.count(r.id)) return SessionRef::name(r.id);
        return r;
    }

    Process resolve(const Process& p, std::set<std::string> bound) const
    {
        switch (p.kind()) {
        case Process::Kind::Nil:
            return p;
        case Process::Kind::Sum: {
            std::vector<SumBranch> out;
            for (const auto& b : p.branches()) {
                Prefix pre = b.prefix;
                pre.session = resolve(pre.session, bound);
                out.push_back({pre, resolve(b.cont, bound)});
            }
            return Process::sum(std::move(out));
        }
        case Process::Kind::Par: {
            std::vector<Process> out;
            for (const auto& q : p.parts()) out.push_back(resolve(q, bound));
            return Process::par(std::move(out));
        }
        case Process::Kind::Delim:
            bound.insert(p.session_vars().begin(), p.session_vars().end());
            return Process::delim(p.session_vars(), p.part_vars(), resolve(p.body(), bound));
        case Process::Kind::Call: {
            std::vector<SessionRef> sargs;
            for (const auto& r : p.session_args()) sargs.push_back(resolve(r, bound));
            return Process::call(p.callee(), std::move(sargs), p.part_args());
        }
        }
        return p;
    }

    // Session identifiers naming a declared session refer to it; calls must
    // target known definitions with the right arity.
    void resolve_sessions()
    {
        for (const auto& c : calls_) {
            auto it = sys_.definitions.find(c.name);
            if (it == sys_.definitions.end()) in_.fail("unknown definition " + c.name, c.span);
            if (it->second.session_params.size() != c.sessions || it->second.part_params.size() != c.parts)
                in_.fail("arity mismatch in call to " + c.name, c.span);
        }
        if (sys_.sessions.empty()) return;
        for (auto& [a, ps] : sys_.processes)
            for (auto& p : ps) p = resolve(p, {});
        for (auto& [n, d] : sys_.definitions) {
            std::set<std::string> bound(d.session_params.begin(), d.session_params.end());
            d.body = resolve(d.body, bound);
        }
    }
};

std::string join_list(const std::vector<std::string>& xs)
{
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
    return out;
}

std::string render_policy(const FusePolicy& p)
{
    std::vector<std::string> opts;
    if (p.min_participants != 2) opts.push_back("min=" + std::to_string(p.min_participants));
    if (p.mode == FuseMode::Terminating) opts.push_back("terminating");
    if (p.mode == FuseMode::RecursiveOnly) opts.push_back("recursive");
    return join_list(opts);
}

std::string render_unit(const Process& p);

std::string render_branch(const SumBranch& b)
{
    std::string out = render(b.prefix);
    if (b.cont.kind() != Process::Kind::Nil) out += " . " + render_unit(b.cont);
    return out;
}

std::string render_unit(const Process& p)
{
    if ((p.kind() == Process::Kind::Sum && p.branches().size() > 1) || p.kind() == Process::Kind::Par)
        return "(" + render(p) + ")";
    return render(p);
}

}  // namespace

Co2System parse_system(std::string_view text) { return SystemParser(text).parse(); }

std::string render(const Prefix& p)
{
    switch (p.kind) {
    case Prefix::Kind::Tau:
        return "tau";
    case Prefix::Kind::Tell:
        return "tell " + p.part.id + " @" + p.session.id + " { " + render(p.contract) + " }";
    case Prefix::Kind::Fuse: {
        if (!p.policy) return "fuse";
        std::string opts = render_policy(*p.policy);
        return opts.empty() ? "fuse(min=2)" : "fuse(" + opts + ")";
    }
    case Prefix::Kind::Do:
        return "do " + p.session.id + " " + p.part.id + to_string(p.dir) + p.sort.name;
    }
    return "tau";
}

std::string render(const Process& p)
{
    switch (p.kind()) {
    case Process::Kind::Nil:
        return "0";
    case Process::Kind::Sum: {
        std::string out;
        for (const auto& b : p.branches()) out += (out.empty() ? "" : " + ") + render_branch(b);
        return out;
    }
    case Process::Kind::Par: {
        if (p.parts().empty()) return "0";
        std::string out;
        for (const auto& q : p.parts())
            out += (out.empty() ? "" : " | ") + (q.kind() == Process::Kind::Par ? "(" + render(q) + ")" : render(q));
        return out;
    }
    case Process::Kind::Delim:
        return "(" + join_list(p.session_vars()) + "; " + join_list(p.part_vars()) + ") " + render_unit(p.body());
    case Process::Kind::Call: {
        std::vector<std::string> s, a;
        for (const auto& r : p.session_args()) s.push_back(r.id);
        for (const auto& r : p.part_args()) a.push_back(r.id);
        return p.callee() + "(" + join_list(s) + "; " + join_list(a) + ")";
    }
    }
    return "0";
}

std::string render(const LatentContract& l) { return l.session.id + ": " + l.promiser + " says " + render(l.contract); }

std::string render_system(const Co2System& s)
{
    std::ostringstream out;
    if (s.default_policy != FusePolicy{} || s.order != AgreementOrder::LargestFirst) {
        std::string opts = render_policy(s.default_policy);
        if (s.order == AgreementOrder::SmallestFirst) opts += (opts.empty() ? "" : ", ") + std::string("smallest");
        if (opts.empty()) opts = "min=2";
        out << "policy { " << opts << " }\n";
    }
    for (const auto& [name, d] : s.definitions)
        out << "def " << name << "(" << join_list(d.session_params) << "; " << join_list(d.part_params)
            << ") = " << render(d.body) << "\n";
    for (const auto& [name, threads] : s.processes) {
        out << "participant " << name << " { ";
        if (threads.size() == 1)
            out << render(threads.front());
        else
            out << render(Process::par(threads));
        out << " }\n";
    }
    for (const auto& [name, t] : s.sessions) {
        out << "session " << name << " {";
        for (const auto& [p, c] : t.contracts) out << " " << p << ": " << render(c) << ";";
        for (const auto& [ch, q] : t.queues) {
            if (q.empty()) continue;
            std::vector<std::string> sorts;
            for (const auto& x : q) sorts.push_back(x.name);
            out << " queue " << ch.first << " -> " << ch.second << " : [" << join_list(sorts) << "];";
        }
        out << " }\n";
    }
    for (const auto& [host, latent] : s.pools) {
        if (latent.empty()) continue;
        out << "pool " << host << " {";
        for (const auto& l : latent) out << " " << render(l) << ";";
        out << " }\n";
    }
    return out.str();
}

nlohmann::ordered_json to_json(const TraceStep& step)
{
    const StepLabel& l = step.label;
    nlohmann::ordered_json j;
    j["step"] = step.index;
    j["actor"] = l.actor;
    j["kind"] = to_string(l.kind);
    if (l.session) j["session"] = *l.session;
    switch (l.kind) {
    case StepKind::Do:
        j["peer"] = l.prefix.part.id;
        j["sort"] = l.prefix.sort.name;
        j["dir"] = l.prefix.dir == Dir::Send ? "send" : "recv";
        break;
    case StepKind::Tell:
        j["peer"] = l.prefix.part.id;
        j["sessionVar"] = l.prefix.session.id;
        j["contract"] = render(l.prefix.contract);
        break;
    case StepKind::Call:
        j["callee"] = l.callee;
        break;
    default:
        break;
    }
    if (l.fuse) {
        nlohmann::ordered_json f;
        f["participants"] = l.fuse->participants;
        f["globalType"] = render(l.fuse->global);
        f["sigma"] = l.fuse->sigma;
        f["pi"] = l.fuse->pi;
        j["fuseReport"] = f;
    }
    j["stateDigest"] = step.digest;
    return j;
}

TraceStep trace_step_from_json(const nlohmann::json& j)
{
    TraceStep s;
    s.index = j.at("step").get<std::size_t>();
    s.digest = j.at("stateDigest").get<std::string>();
    StepLabel& l = s.label;
    l.actor = j.at("actor").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (j.contains("session")) l.session = j.at("session").get<std::string>();
    if (kind == "tau") {
        l.kind = StepKind::Tau;
    } else if (kind == "call") {
        l.kind = StepKind::Call;
        l.callee = j.at("callee").get<std::string>();
    } else if (kind == "tell") {
        l.kind = StepKind::Tell;
        l.prefix = Prefix::tell(PartRef::name(j.at("peer").get<std::string>()), j.at("sessionVar").get<std::string>(),
                                parse_contract(j.at("contract").get<std::string>()));
    } else if (kind == "do") {
        l.kind = StepKind::Do;
        std::string dir = j.at("dir").get<std::string>();
        if (dir != "send" && dir != "recv") throw Error("bad direction '" + dir + "'");
        l.prefix = Prefix::act(SessionRef::name(l.session.value_or("")), PartRef::name(j.at("peer").get<std::string>()),
                               Sort{j.at("sort").get<std::string>()}, dir == "send" ? Dir::Send : Dir::Recv);
    } else if (kind == "fuse") {
        l.kind = StepKind::Fuse;
        l.prefix = Prefix::fuse();
        if (j.contains("fuseReport")) {
            const auto& f = j.at("fuseReport");
            FuseReport r;
            r.participants = f.at("participants").get<std::vector<std::string>>();
            r.global = parse_global(f.at("globalType").get<std::string>());
            r.sigma = f.at("sigma").get<std::map<std::string, std::string>>();
            r.pi = f.at("pi").get<std::map<std::string, std::string>>();
            r.session = l.session.value_or("");
            l.fuse = std::move(r);
        }
    } else {
        throw Error("unknown step kind '" + kind + "'");
    }
    return s;
}

void write_trace(std::ostream& out, const std::vector<TraceStep>& steps)
{
    for (const auto& s : steps) out << to_json(s).dump() << "\n";
}

std::vector<TraceStep> read_trace(std::istream& in)
{
    std::vector<TraceStep> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(trace_step_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw Error("malformed trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace co2
