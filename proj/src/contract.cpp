#include "co2/contract.hpp"

#include <algorithm>

namespace co2 {

struct Contract::Node {
    Kind kind = Kind::End;
    std::vector<SendBranch> sends;
    PartRef from;
    std::vector<RecvBranch> recvs;
    std::string var;
    std::vector<Contract> body;  // one element for Rec
};

Contract::Contract()
{
    static const auto end_node = std::make_shared<const Node>();
    node_ = end_node;
}

Contract::Contract(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Contract Contract::end() { return Contract(); }

Contract Contract::send(std::vector<SendBranch> branches)
{
    if (branches.empty()) throw Error("internal choice needs at least one branch");
    std::sort(branches.begin(), branches.end(), [](const SendBranch& a, const SendBranch& b) {
        return std::tie(a.to, a.sort) < std::tie(b.to, b.sort);
    });
    for (std::size_t i = 1; i < branches.size(); ++i) {
        if (branches[i - 1].to == branches[i].to && branches[i - 1].sort == branches[i].sort)
            throw Error("duplicate branch " + branches[i].to.id + "!" + branches[i].sort.name +
                        " in internal choice");
    }
    auto node = std::make_shared<Node>();
    node->kind = Kind::Send;
    node->sends = std::move(branches);
    return Contract(std::move(node));
}

Contract Contract::recv(PartRef from, std::vector<RecvBranch> branches)
{
    if (branches.empty()) throw Error("external choice needs at least one branch");
    std::sort(branches.begin(), branches.end(),
              [](const RecvBranch& a, const RecvBranch& b) { return a.sort < b.sort; });
    for (std::size_t i = 1; i < branches.size(); ++i) {
        if (branches[i - 1].sort == branches[i].sort)
            throw Error("duplicate sort " + branches[i].sort.name + " in external choice");
    }
    auto node = std::make_shared<Node>();
    node->kind = Kind::Recv;
    node->from = std::move(from);
    node->recvs = std::move(branches);
    return Contract(std::move(node));
}

Contract Contract::rec(std::string var, Contract body)
{
    auto node = std::make_shared<Node>();
    node->kind = Kind::Rec;
    node->var = std::move(var);
    node->body.push_back(std::move(body));
    return Contract(std::move(node));
}

Contract Contract::var(std::string name)
{
    auto node = std::make_shared<Node>();
    node->kind = Kind::Var;
    node->var = std::move(name);
    return Contract(std::move(node));
}

Contract::Kind Contract::kind() const { return node_->kind; }
const std::vector<SendBranch>& Contract::send_branches() const { return node_->sends; }
const PartRef& Contract::recv_from() const { return node_->from; }
const std::vector<RecvBranch>& Contract::recv_branches() const { return node_->recvs; }
const std::string& Contract::rec_var() const { return node_->var; }
const Contract& Contract::rec_body() const { return node_->body.front(); }
const std::string& Contract::var_name() const { return node_->var; }

std::strong_ordering operator<=>(const Contract& a, const Contract& b)
{
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (auto c = a.kind() <=> b.kind(); c != 0) return c;
    switch (a.kind()) {
    case Contract::Kind::End:
        return std::strong_ordering::equal;
    case Contract::Kind::Send:
        return std::lexicographical_compare_three_way(a.node_->sends.begin(), a.node_->sends.end(),
                                                      b.node_->sends.begin(), b.node_->sends.end());
    case Contract::Kind::Recv:
        if (auto c = a.node_->from <=> b.node_->from; c != 0) return c;
        return std::lexicographical_compare_three_way(a.node_->recvs.begin(), a.node_->recvs.end(),
                                                      b.node_->recvs.begin(), b.node_->recvs.end());
    case Contract::Kind::Rec:
        if (auto c = a.node_->var <=> b.node_->var; c != 0) return c;
        return std::lexicographical_compare_three_way(a.node_->body.begin(), a.node_->body.end(),
                                                      b.node_->body.begin(), b.node_->body.end());
    case Contract::Kind::Var:
        return a.node_->var <=> b.node_->var;
    }
    return std::strong_ordering::equal;
}

bool operator==(const Contract& a, const Contract& b) { return (a <=> b) == 0; }

Contract substitute_rec_var(const Contract& c, const std::string& var, const Contract& replacement)
{
    switch (c.kind()) {
    case Contract::Kind::End:
        return c;
    case Contract::Kind::Var:
        return c.var_name() == var ? replacement : c;
    case Contract::Kind::Rec:
        if (c.rec_var() == var) return c;  // shadowed
        return Contract::rec(c.rec_var(), substitute_rec_var(c.rec_body(), var, replacement));
    case Contract::Kind::Send: {
        std::vector<SendBranch> out;
        for (const auto& b : c.send_branches())
            out.push_back({b.to, b.sort, substitute_rec_var(b.cont, var, replacement)});
        return Contract::send(std::move(out));
    }
    case Contract::Kind::Recv: {
        std::vector<RecvBranch> out;
        for (const auto& b : c.recv_branches())
            out.push_back({b.sort, substitute_rec_var(b.cont, var, replacement)});
        return Contract::recv(c.recv_from(), std::move(out));
    }
    }
    return c;
}

Contract unfold(const Contract& c)
{
    if (c.kind() != Contract::Kind::Rec) return c;
    return substitute_rec_var(c.rec_body(), c.rec_var(), c);
}

Contract unfold_head(const Contract& c)
{
    Contract cur = c;
    // Guardedness bounds this loop by the number of nested binders.
    for (int guard = 0; cur.kind() == Contract::Kind::Rec; ++guard) {
        if (guard > 10000) throw Error("unguarded recursion");
        cur = unfold(cur);
    }
    return cur;
}

namespace {

PartRef subst_ref(const PartRef& r, const std::map<std::string, PartRef>& subst)
{
    if (r.is_var()) {
        if (auto it = subst.find(r.id); it != subst.end()) return it->second;
    }
    return r;
}

void collect_part_vars(const Contract& c, std::set<std::string>& out)
{
    switch (c.kind()) {
    case Contract::Kind::Send:
        for (const auto& b : c.send_branches()) {
            if (b.to.is_var()) out.insert(b.to.id);
            collect_part_vars(b.cont, out);
        }
        break;
    case Contract::Kind::Recv:
        if (c.recv_from().is_var()) out.insert(c.recv_from().id);
        for (const auto& b : c.recv_branches()) collect_part_vars(b.cont, out);
        break;
    case Contract::Kind::Rec:
        collect_part_vars(c.rec_body(), out);
        break;
    default:
        break;
    }
}

void collect_names(const Contract& c, std::set<std::string>& out)
{
    switch (c.kind()) {
    case Contract::Kind::Send:
        for (const auto& b : c.send_branches()) {
            if (b.to.is_name()) out.insert(b.to.id);
            collect_names(b.cont, out);
        }
        break;
    case Contract::Kind::Recv:
        if (c.recv_from().is_name()) out.insert(c.recv_from().id);
        for (const auto& b : c.recv_branches()) collect_names(b.cont, out);
        break;
    case Contract::Kind::Rec:
        collect_names(c.rec_body(), out);
        break;
    default:
        break;
    }
}

void collect_free_rec(const Contract& c, std::set<std::string>& bound, std::set<std::string>& out)
{
    switch (c.kind()) {
    case Contract::Kind::Var:
        if (!bound.count(c.var_name())) out.insert(c.var_name());
        break;
    case Contract::Kind::Rec: {
        bool fresh = bound.insert(c.rec_var()).second;
        collect_free_rec(c.rec_body(), bound, out);
        if (fresh) bound.erase(c.rec_var());
        break;
    }
    case Contract::Kind::Send:
        for (const auto& b : c.send_branches()) collect_free_rec(b.cont, bound, out);
        break;
    case Contract::Kind::Recv:
        for (const auto& b : c.recv_branches()) collect_free_rec(b.cont, bound, out);
        break;
    case Contract::Kind::End:
        break;
    }
}

// Variables reachable from the head without crossing a prefix. Sets `ok` to
// false when a binder captures one of its own unguarded occurrences.
std::set<std::string> unguarded(const Contract& c, bool& ok)
{
    switch (c.kind()) {
    case Contract::Kind::Var:
        return {c.var_name()};
    case Contract::Kind::Rec: {
        auto inner = unguarded(c.rec_body(), ok);
        if (inner.count(c.rec_var())) ok = false;
        inner.erase(c.rec_var());
        return inner;
    }
    case Contract::Kind::Send:
        for (const auto& b : c.send_branches()) unguarded(b.cont, ok);
        return {};
    case Contract::Kind::Recv:
        for (const auto& b : c.recv_branches()) unguarded(b.cont, ok);
        return {};
    case Contract::Kind::End:
        return {};
    }
    return {};
}

bool occurs_free(const Contract& c, const std::string& var)
{
    return free_rec_vars(c).count(var) > 0;
}

Contract canonical_at(const Contract& c, std::size_t depth, const std::map<std::string, std::string>& names,
                      const std::set<std::string>& avoid)
{
    switch (c.kind()) {
    case Contract::Kind::End:
        return c;
    case Contract::Kind::Var: {
        auto it = names.find(c.var_name());
        return it == names.end() ? c : Contract::var(it->second);
    }
    case Contract::Kind::Rec: {
        if (!occurs_free(c.rec_body(), c.rec_var())) return canonical_at(c.rec_body(), depth, names, avoid);
        std::string fresh = "x" + std::to_string(depth);
        while (avoid.count(fresh)) fresh += "'";
        auto inner = names;
        inner[c.rec_var()] = fresh;
        return Contract::rec(fresh, canonical_at(c.rec_body(), depth + 1, inner, avoid));
    }
    case Contract::Kind::Send: {
        std::vector<SendBranch> out;
        for (const auto& b : c.send_branches()) out.push_back({b.to, b.sort, canonical_at(b.cont, depth, names, avoid)});
        return Contract::send(std::move(out));
    }
    case Contract::Kind::Recv: {
        std::vector<RecvBranch> out;
        for (const auto& b : c.recv_branches()) out.push_back({b.sort, canonical_at(b.cont, depth, names, avoid)});
        return Contract::recv(c.recv_from(), std::move(out));
    }
    }
    return c;
}

}  // namespace

Contract substitute_parts(const Contract& c, const std::map<std::string, PartRef>& subst)
{
    switch (c.kind()) {
    case Contract::Kind::End:
    case Contract::Kind::Var:
        return c;
    case Contract::Kind::Rec:
        return Contract::rec(c.rec_var(), substitute_parts(c.rec_body(), subst));
    case Contract::Kind::Send: {
        std::vector<SendBranch> out;
        for (const auto& b : c.send_branches())
            out.push_back({subst_ref(b.to, subst), b.sort, substitute_parts(b.cont, subst)});
        return Contract::send(std::move(out));
    }
    case Contract::Kind::Recv: {
        std::vector<RecvBranch> out;
        for (const auto& b : c.recv_branches()) out.push_back({b.sort, substitute_parts(b.cont, subst)});
        return Contract::recv(subst_ref(c.recv_from(), subst), std::move(out));
    }
    }
    return c;
}

std::set<std::string> free_participant_vars(const Contract& c)
{
    std::set<std::string> out;
    collect_part_vars(c, out);
    return out;
}

std::set<std::string> participant_names(const Contract& c)
{
    std::set<std::string> out;
    collect_names(c, out);
    return out;
}

std::set<std::string> free_rec_vars(const Contract& c)
{
    std::set<std::string> bound, out;
    collect_free_rec(c, bound, out);
    return out;
}

bool is_guarded(const Contract& c)
{
    bool ok = true;
    unguarded(c, ok);
    return ok;
}

bool is_closed(const Contract& c) { return free_rec_vars(c).empty(); }

Contract canonical(const Contract& c) { return canonical_at(c, 0, {}, free_rec_vars(c)); }

namespace {

// Coinductive comparison of the trees denoted by a and b. With `pruned`,
// external choices of a may offer a subset of the sorts offered by b.
bool same_tree(const Contract& a, const Contract& b, bool pruned)
{
    std::set<std::pair<Contract, Contract>> seen;
    std::vector<std::pair<Contract, Contract>> work{{canonical(a), canonical(b)}};
    while (!work.empty()) {
        auto [x, y] = work.back();
        work.pop_back();
        if (x == y) continue;
        if (!seen.insert({x, y}).second) continue;
        Contract hx = unfold_head(x), hy = unfold_head(y);
        if (hx.kind() != hy.kind()) return false;
        switch (hx.kind()) {
        case Contract::Kind::End:
            break;
        case Contract::Kind::Var:
            if (hx.var_name() != hy.var_name()) return false;
            break;
        case Contract::Kind::Send: {
            const auto& bx = hx.send_branches();
            const auto& by = hy.send_branches();
            if (bx.size() != by.size()) return false;
            for (std::size_t i = 0; i < bx.size(); ++i) {
                if (bx[i].to != by[i].to || bx[i].sort != by[i].sort) return false;
                work.push_back({canonical(bx[i].cont), canonical(by[i].cont)});
            }
            break;
        }
        case Contract::Kind::Recv: {
            if (hx.recv_from() != hy.recv_from()) return false;
            const auto& bx = hx.recv_branches();
            const auto& by = hy.recv_branches();
            if (!pruned && bx.size() != by.size()) return false;
            for (const auto& rx : bx) {
                auto ry = std::find_if(by.begin(), by.end(), [&](const RecvBranch& r) { return r.sort == rx.sort; });
                if (ry == by.end()) return false;
                work.push_back({canonical(rx.cont), canonical(ry->cont)});
            }
            break;
        }
        case Contract::Kind::Rec:
            return false;  // unreachable after unfold_head
        }
    }
    return true;
}

}  // namespace

bool equivalent(const Contract& a, const Contract& b) { return same_tree(a, b, false); }

bool conforms(const Contract& projection, const Contract& contract) { return same_tree(projection, contract, true); }

std::set<ReadySet> contract_ready_sets(const Contract& c)
{
    if (!free_participant_vars(c).empty()) throw Error("unstipulated contract");
    Contract h = unfold_head(c);
    std::set<ReadySet> out;
    switch (h.kind()) {
    case Contract::Kind::Send:
        for (const auto& b : h.send_branches()) out.insert(ReadySet{Interaction{b.to.id, b.sort, Dir::Send}});
        break;
    case Contract::Kind::Recv: {
        ReadySet all;
        for (const auto& b : h.recv_branches()) all.insert(Interaction{h.recv_from().id, b.sort, Dir::Recv});
        out.insert(std::move(all));
        break;
    }
    case Contract::Kind::End:
        break;
    case Contract::Kind::Var:
    case Contract::Kind::Rec:
        throw Error("contract is not closed");
    }
    return out;
}

ContractSystem ContractSystem::with_empty_queues(std::map<std::string, Contract> contracts)
{
    ContractSystem t;
    for (const auto& [a, _] : contracts)
        for (const auto& [b, __] : contracts)
            if (a != b) t.queues[{a, b}] = {};
    t.contracts = std::move(contracts);
    return t;
}

void ContractSystem::validate() const
{
    std::size_t expected = 0;
    for (const auto& [a, c] : contracts) {
        if (!is_closed(c)) throw Error("contract of " + a + " has free recursion variables");
        if (!is_guarded(c)) throw Error("contract of " + a + " has unguarded recursion");
        if (!free_participant_vars(c).empty()) throw Error("contract of " + a + " is unstipulated");
        for (const auto& [b, _] : contracts) {
            if (a == b) continue;
            ++expected;
            if (!queues.count({a, b})) throw Error("missing queue " + a + "->" + b);
        }
    }
    if (queues.size() != expected) throw Error("queue for a pair of non-participants");
}

std::vector<MoveLabel> enabled_moves(const ContractSystem& t)
{
    std::vector<MoveLabel> out;
    for (const auto& [actor, c] : t.contracts) {
        Contract h = unfold_head(c);
        if (h.kind() == Contract::Kind::Send) {
            for (const auto& b : h.send_branches()) {
                if (b.to.is_name() && t.queues.count({actor, b.to.id}))
                    out.push_back({actor, b.to.id, b.sort, Dir::Send});
            }
        } else if (h.kind() == Contract::Kind::Recv && h.recv_from().is_name()) {
            auto q = t.queues.find({h.recv_from().id, actor});
            if (q == t.queues.end() || q->second.empty()) continue;
            const Sort& head = q->second.front();
            for (const auto& b : h.recv_branches()) {
                if (b.sort == head) out.push_back({actor, h.recv_from().id, head, Dir::Recv});
            }
        }
    }
    return out;
}

ContractSystem contract_step(const ContractSystem& t, const MoveLabel& move)
{
    auto it = t.contracts.find(move.actor);
    if (it == t.contracts.end()) throw IllegalMove("illegal move: unknown participant " + move.actor);
    Contract h = unfold_head(it->second);
    ContractSystem next = t;
    if (move.dir == Dir::Send && h.kind() == Contract::Kind::Send) {
        auto q = next.queues.find({move.actor, move.peer});
        if (q != next.queues.end()) {
            for (const auto& b : h.send_branches()) {
                if (b.to == PartRef::name(move.peer) && b.sort == move.sort) {
                    next.contracts[move.actor] = b.cont;
                    q->second.push_back(move.sort);
                    return next;
                }
            }
        }
    } else if (move.dir == Dir::Recv && h.kind() == Contract::Kind::Recv &&
               h.recv_from() == PartRef::name(move.peer)) {
        auto q = next.queues.find({move.peer, move.actor});
        if (q != next.queues.end() && !q->second.empty() && q->second.front() == move.sort) {
            for (const auto& b : h.recv_branches()) {
                if (b.sort == move.sort) {
                    next.contracts[move.actor] = b.cont;
                    q->second.erase(q->second.begin());
                    return next;
                }
            }
        }
    }
    throw IllegalMove("illegal move: " + move.actor + (move.dir == Dir::Send ? " -> " : " <- ") + move.peer +
                      " : " + move.sort.name);
}

bool is_terminated(const ContractSystem& t)
{
    for (const auto& [_, c] : t.contracts)
        if (unfold_head(c).kind() != Contract::Kind::End) return false;
    for (const auto& [_, q] : t.queues)
        if (!q.empty()) return false;
    return true;
}

const char* to_string(Dir d) { return d == Dir::Send ? "!" : "?"; }

}  // namespace co2
