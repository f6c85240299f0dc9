#include "co2/choreo.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace co2 {

struct GlobalType::Node {
    Kind kind = Kind::End;
    std::string from, to;
    Sort sort;
    std::vector<GlobalType> children;  // [cont] for Msg, [body] for Rec
    std::string var;
};

GlobalType::GlobalType()
{
    static const auto end_node = std::make_shared<const Node>();
    node_ = end_node;
}
GlobalType::GlobalType(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

GlobalType GlobalType::end() { return GlobalType(); }

GlobalType GlobalType::msg(std::string from, std::string to, Sort sort, GlobalType cont)
{
    if (from == to) throw Error("interaction " + from + " -> " + to + " has the same sender and receiver");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Msg;
    node->from = std::move(from);
    node->to = std::move(to);
    node->sort = std::move(sort);
    node->children.push_back(std::move(cont));
    return GlobalType(std::move(node));
}

GlobalType GlobalType::choice(std::vector<GlobalType> alternatives)
{
    if (alternatives.size() < 2) throw Error("choice needs at least two alternatives");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Choice;
    node->children = std::move(alternatives);
    return GlobalType(std::move(node));
}

GlobalType GlobalType::par(std::vector<GlobalType> threads)
{
    if (threads.size() < 2) throw Error("parallel composition needs at least two threads");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Par;
    node->children = std::move(threads);
    return GlobalType(std::move(node));
}

GlobalType GlobalType::rec(std::string var, GlobalType body)
{
    auto node = std::make_shared<Node>();
    node->kind = Kind::Rec;
    node->var = std::move(var);
    node->children.push_back(std::move(body));
    return GlobalType(std::move(node));
}

GlobalType GlobalType::var(std::string name)
{
    auto node = std::make_shared<Node>();
    node->kind = Kind::Var;
    node->var = std::move(name);
    return GlobalType(std::move(node));
}

GlobalType::Kind GlobalType::kind() const { return node_->kind; }
const std::string& GlobalType::from() const { return node_->from; }
const std::string& GlobalType::to() const { return node_->to; }
const Sort& GlobalType::sort() const { return node_->sort; }
const GlobalType& GlobalType::cont() const { return node_->children.front(); }
const std::vector<GlobalType>& GlobalType::children() const { return node_->children; }
const std::string& GlobalType::rec_var() const { return node_->var; }
const GlobalType& GlobalType::rec_body() const { return node_->children.front(); }
const std::string& GlobalType::var_name() const { return node_->var; }

std::strong_ordering operator<=>(const GlobalType& a, const GlobalType& b)
{
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (auto c = x.kind <=> y.kind; c != 0) return c;
    if (auto c = x.from <=> y.from; c != 0) return c;
    if (auto c = x.to <=> y.to; c != 0) return c;
    if (auto c = x.sort <=> y.sort; c != 0) return c;
    if (auto c = x.var <=> y.var; c != 0) return c;
    return std::lexicographical_compare_three_way(x.children.begin(), x.children.end(), y.children.begin(),
                                                  y.children.end());
}

bool operator==(const GlobalType& a, const GlobalType& b) { return (a <=> b) == 0; }

namespace {

void collect_participants(const GlobalType& g, std::set<std::string>& out)
{
    if (g.kind() == GlobalType::Kind::Msg) {
        out.insert(g.from());
        out.insert(g.to());
    }
    if (g.kind() != GlobalType::Kind::Var && g.kind() != GlobalType::Kind::End)
        for (const auto& c : g.children()) collect_participants(c, out);
}

bool any_node(const GlobalType& g, GlobalType::Kind kind)
{
    if (g.kind() == kind) return true;
    if (g.kind() == GlobalType::Kind::Var || g.kind() == GlobalType::Kind::End) return false;
    for (const auto& c : g.children())
        if (any_node(c, kind)) return true;
    return false;
}

void free_vars(const GlobalType& g, std::set<std::string>& bound, std::set<std::string>& out)
{
    switch (g.kind()) {
    case GlobalType::Kind::Var:
        if (!bound.count(g.var_name())) out.insert(g.var_name());
        return;
    case GlobalType::Kind::End:
        return;
    case GlobalType::Kind::Rec: {
        bool fresh = bound.insert(g.rec_var()).second;
        free_vars(g.rec_body(), bound, out);
        if (fresh) bound.erase(g.rec_var());
        return;
    }
    default:
        for (const auto& c : g.children()) free_vars(c, bound, out);
    }
}

std::set<std::string> free_vars(const GlobalType& g)
{
    std::set<std::string> bound, out;
    free_vars(g, bound, out);
    return out;
}

// Variables reachable without crossing an interaction.
std::set<std::string> unguarded_vars(const GlobalType& g, bool& ok)
{
    switch (g.kind()) {
    case GlobalType::Kind::Var:
        return {g.var_name()};
    case GlobalType::Kind::End:
        return {};
    case GlobalType::Kind::Msg:
        unguarded_vars(g.cont(), ok);
        return {};
    case GlobalType::Kind::Rec: {
        auto inner = unguarded_vars(g.rec_body(), ok);
        if (inner.count(g.rec_var())) ok = false;
        inner.erase(g.rec_var());
        return inner;
    }
    default: {
        std::set<std::string> out;
        for (const auto& c : g.children()) {
            auto sub = unguarded_vars(c, ok);
            out.insert(sub.begin(), sub.end());
        }
        return out;
    }
    }
}

struct FirstMessage {
    std::string from, to;
    Sort sort;

    auto operator<=>(const FirstMessage&) const = default;
};

// First interactions of g, skipping Choice/Par/Rec structure; nullopt when
// some path starts with End or a variable.
std::optional<std::vector<FirstMessage>> first_messages(const GlobalType& g)
{
    switch (g.kind()) {
    case GlobalType::Kind::Msg:
        return std::vector<FirstMessage>{{g.from(), g.to(), g.sort()}};
    case GlobalType::Kind::Rec:
        return first_messages(g.rec_body());
    case GlobalType::Kind::Choice:
    case GlobalType::Kind::Par: {
        std::vector<FirstMessage> out;
        for (const auto& c : g.children()) {
            auto sub = first_messages(c);
            if (!sub) return std::nullopt;
            out.insert(out.end(), sub->begin(), sub->end());
        }
        return out;
    }
    default:
        return std::nullopt;
    }
}

Contract merge_external(const Contract& a, const Contract& b, const std::string& who);

// Merge for a participant that does not decide the choice: identical
// behaviour, the same sends, or receives from one peer.
Contract merge(const Contract& a, const Contract& b, const std::string& who)
{
    if (a == b) return a;
    if (a.kind() != b.kind()) throw ProjectionError("not projectable for " + who + ": branches differ");
    switch (a.kind()) {
    case Contract::Kind::Send: {
        const auto& x = a.send_branches();
        const auto& y = b.send_branches();
        if (x.size() != y.size()) throw ProjectionError("not projectable for " + who + ": unaware of choice");
        std::vector<SendBranch> out;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].to != y[i].to || x[i].sort != y[i].sort)
                throw ProjectionError("not projectable for " + who + ": unaware of choice");
            out.push_back({x[i].to, x[i].sort, merge(x[i].cont, y[i].cont, who)});
        }
        return Contract::send(std::move(out));
    }
    case Contract::Kind::Recv:
        return merge_external(a, b, who);
    case Contract::Kind::Rec:
        if (a.rec_var() == b.rec_var()) return Contract::rec(a.rec_var(), merge(a.rec_body(), b.rec_body(), who));
        break;
    default:
        break;
    }
    throw ProjectionError("not projectable for " + who + ": branches differ");
}

Contract merge_external(const Contract& a, const Contract& b, const std::string& who)
{
    if (a.recv_from() != b.recv_from())
        throw ProjectionError("not projectable for " + who + ": receives from different peers");
    std::map<Sort, Contract> branches;
    for (const auto& br : a.recv_branches()) branches[br.sort] = br.cont;
    for (const auto& br : b.recv_branches()) {
        auto it = branches.find(br.sort);
        if (it == branches.end())
            branches[br.sort] = br.cont;
        else
            it->second = merge(it->second, br.cont, who);
    }
    std::vector<RecvBranch> out;
    for (auto& [s, c] : branches) out.push_back({s, c});
    return Contract::recv(a.recv_from(), std::move(out));
}

Contract merge_internal(const Contract& a, const Contract& b, const std::string& who)
{
    if (a.kind() != Contract::Kind::Send || b.kind() != Contract::Kind::Send)
        throw ProjectionError("not projectable for " + who + ": decider does not send first");
    std::vector<SendBranch> out = a.send_branches();
    for (const auto& br : b.send_branches()) {
        auto same = std::find_if(out.begin(), out.end(),
                                 [&](const SendBranch& x) { return x.to == br.to && x.sort == br.sort; });
        if (same == out.end())
            out.push_back(br);
        else if (same->cont != br.cont)
            throw ProjectionError("not projectable for " + who + ": ambiguous selection " + br.to.id + "!" +
                                  br.sort.name);
    }
    return Contract::send(std::move(out));
}

Contract project_impl(const GlobalType& g, const std::string& who)
{
    if ((g.kind() == GlobalType::Kind::Choice || g.kind() == GlobalType::Kind::Rec) && !participants(g).count(who) &&
        free_vars(g).empty())
        return Contract::end();
    switch (g.kind()) {
    case GlobalType::Kind::End:
        return Contract::end();
    case GlobalType::Kind::Var:
        return Contract::var(g.var_name());
    case GlobalType::Kind::Msg: {
        Contract cont = project_impl(g.cont(), who);
        if (g.from() == who) return Contract::send({{PartRef::name(g.to()), g.sort(), cont}});
        if (g.to() == who) return Contract::recv(PartRef::name(g.from()), {{g.sort(), cont}});
        return cont;
    }
    case GlobalType::Kind::Choice: {
        bool decides = choice_decider(g) == who;
        Contract acc = project_impl(g.children().front(), who);
        for (std::size_t i = 1; i < g.children().size(); ++i) {
            Contract next = project_impl(g.children()[i], who);
            acc = decides ? merge_internal(acc, next, who) : merge(acc, next, who);
        }
        return acc;
    }
    case GlobalType::Kind::Par: {
        const GlobalType* mine = nullptr;
        for (const auto& t : g.children()) {
            if (!participants(t).count(who)) continue;
            if (mine) throw ProjectionError("not projectable for " + who + ": appears in two parallel threads");
            mine = &t;
        }
        return mine ? project_impl(*mine, who) : Contract::end();
    }
    case GlobalType::Kind::Rec: {
        Contract body = project_impl(g.rec_body(), who);
        if (body.kind() == Contract::Kind::Var && body.var_name() == g.rec_var()) return Contract::end();
        if (!free_rec_vars(body).count(g.rec_var())) return body;
        return Contract::rec(g.rec_var(), body);
    }
    }
    return Contract::end();
}

GlobalType canon(const GlobalType& g, std::size_t depth, const std::map<std::string, std::string>& names,
                 const std::set<std::string>& avoid)
{
    switch (g.kind()) {
    case GlobalType::Kind::End:
        return g;
    case GlobalType::Kind::Var: {
        auto it = names.find(g.var_name());
        return it == names.end() ? g : GlobalType::var(it->second);
    }
    case GlobalType::Kind::Msg:
        return GlobalType::msg(g.from(), g.to(), g.sort(), canon(g.cont(), depth, names, avoid));
    case GlobalType::Kind::Rec: {
        if (!free_vars(g.rec_body()).count(g.rec_var())) return canon(g.rec_body(), depth, names, avoid);
        std::string fresh = "x" + std::to_string(depth);
        while (avoid.count(fresh)) fresh += "'";
        auto inner = names;
        inner[g.rec_var()] = fresh;
        return GlobalType::rec(fresh, canon(g.rec_body(), depth + 1, inner, avoid));
    }
    case GlobalType::Kind::Choice:
    case GlobalType::Kind::Par: {
        std::vector<GlobalType> flat;
        for (const auto& c : g.children()) {
            GlobalType cc = canon(c, depth, names, avoid);
            if (cc.kind() == g.kind())
                flat.insert(flat.end(), cc.children().begin(), cc.children().end());
            else
                flat.push_back(std::move(cc));
        }
        std::sort(flat.begin(), flat.end());
        return g.kind() == GlobalType::Kind::Choice ? GlobalType::choice(std::move(flat))
                                                    : GlobalType::par(std::move(flat));
    }
    }
    return g;
}

void check_structure(const GlobalType& g, WellFormedness& wf)
{
    auto fail = [&](std::string msg) {
        wf.ok = false;
        wf.diagnostics.push_back(std::move(msg));
    };
    switch (g.kind()) {
    case GlobalType::Kind::Par: {
        std::set<std::string> seen;
        for (const auto& t : g.children()) {
            for (const auto& p : participants(t))
                if (!seen.insert(p).second) fail("participant " + p + " occurs in more than one parallel thread");
        }
        break;
    }
    case GlobalType::Kind::Choice: {
        std::set<std::string> senders;
        std::set<FirstMessage> selections;
        for (const auto& alt : g.children()) {
            auto firsts = first_messages(alt);
            if (!firsts) {
                fail("choice alternative does not start with an interaction");
                continue;
            }
            std::set<FirstMessage> mine;
            for (const auto& m : *firsts) {
                senders.insert(m.from);
                mine.insert(m);
            }
            for (const auto& m : mine)
                if (!selections.insert(m).second)
                    fail("choice alternatives share the selection " + m.from + " -> " + m.to + " : " + m.sort.name);
        }
        if (senders.size() > 1) {
            std::string names;
            for (const auto& s : senders) names += (names.empty() ? "" : ", ") + s;
            fail("choice has more than one deciding participant: " + names);
        }
        break;
    }
    default:
        break;
    }
    if (g.kind() != GlobalType::Kind::Var && g.kind() != GlobalType::Kind::End)
        for (const auto& c : g.children()) check_structure(c, wf);
}

}  // namespace

std::set<std::string> participants(const GlobalType& g)
{
    std::set<std::string> out;
    collect_participants(g, out);
    return out;
}

bool has_recursion(const GlobalType& g) { return any_node(g, GlobalType::Kind::Var); }

bool has_end(const GlobalType& g) { return any_node(g, GlobalType::Kind::End); }

std::string choice_decider(const GlobalType& choice)
{
    auto firsts = first_messages(choice);
    if (!firsts || firsts->empty()) return {};
    std::set<std::string> senders;
    for (const auto& m : *firsts) senders.insert(m.from);
    return senders.size() == 1 ? *senders.begin() : std::string{};
}

Contract project(const GlobalType& g, const std::string& participant) { return project_impl(g, participant); }

WellFormedness well_formed(const GlobalType& g)
{
    WellFormedness wf;
    for (const auto& v : free_vars(g)) {
        wf.ok = false;
        wf.diagnostics.push_back("free recursion variable " + v);
    }
    bool guarded = true;
    unguarded_vars(g, guarded);
    if (!guarded) {
        wf.ok = false;
        wf.diagnostics.push_back("unguarded recursion");
    }
    check_structure(g, wf);
    for (const auto& p : participants(g)) {
        try {
            project(g, p);
        } catch (const ProjectionError& e) {
            wf.ok = false;
            wf.diagnostics.push_back(e.what());
        }
    }
    return wf;
}

GlobalType canonicalize(const GlobalType& g) { return canon(g, 0, {}, free_vars(g)); }

}  // namespace co2
