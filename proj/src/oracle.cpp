#include "co2/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace co2 {

namespace {

struct Edge {
    std::size_t to;
    std::vector<std::string> actors;
    Sort sort;
};

struct Graph {
    std::vector<ContractSystem> states;
    std::vector<std::vector<Edge>> edges;
    bool truncated = false;
};

struct Successor {
    ContractSystem state;
    std::vector<std::string> actors;
    Sort sort;
};

using SuccessorFn = std::function<std::vector<Successor>(const ContractSystem&)>;

ContractSystem normalized(ContractSystem t)
{
    for (auto& [p, c] : t.contracts) c = canonical(c);
    return t;
}

Graph explore(const ContractSystem& init, const SuccessorFn& successors, std::size_t budget)
{
    Graph g;
    std::map<ContractSystem, std::size_t> index;
    auto add = [&](ContractSystem s) {
        auto [it, fresh] = index.emplace(std::move(s), g.states.size());
        if (fresh) {
            g.states.push_back(it->first);
            g.edges.emplace_back();
        }
        return it->second;
    };
    add(normalized(init));
    for (std::size_t i = 0; i < g.states.size(); ++i) {
        if (g.states.size() > budget) {
            g.truncated = true;
            break;
        }
        for (auto& succ : successors(g.states[i])) {
            std::size_t j = add(normalized(std::move(succ.state)));
            g.edges[i].push_back({j, std::move(succ.actors), std::move(succ.sort)});
        }
    }
    return g;
}

std::vector<Successor> async_successors(const ContractSystem& t, std::size_t bound)
{
    std::vector<Successor> out;
    for (const auto& m : enabled_moves(t)) {
        if (m.dir == Dir::Send && t.queues.at({m.actor, m.peer}).size() >= bound) continue;
        out.push_back({contract_step(t, m), {m.actor}, m.sort});
    }
    return out;
}

std::vector<Successor> sync_successors(const ContractSystem& t)
{
    std::vector<Successor> out;
    for (const auto& [x, c] : t.contracts) {
        Contract head = unfold_head(c);
        if (head.kind() != Contract::Kind::Send) continue;
        for (const auto& br : head.send_branches()) {
            auto peer = t.contracts.find(br.to.id);
            if (!br.to.is_name() || peer == t.contracts.end()) continue;
            Contract ph = unfold_head(peer->second);
            if (ph.kind() != Contract::Kind::Recv || ph.recv_from() != PartRef::name(x)) continue;
            for (const auto& rb : ph.recv_branches()) {
                if (rb.sort != br.sort) continue;
                ContractSystem next = t;
                next.contracts[x] = br.cont;
                next.contracts[br.to.id] = rb.cont;
                out.push_back({std::move(next), {x, br.to.id}, br.sort});
            }
        }
    }
    return out;
}

bool live(const ContractSystem& t, const std::string& p) { return !unfold_head(t.contracts.at(p)).is_end(); }

// Residual communication components: participants linked when one's
// remaining contract mentions the other.
std::map<std::string, std::string> residual_components(const ContractSystem& t)
{
    std::map<std::string, std::string> parent;
    for (const auto& [p, c] : t.contracts) parent[p] = p;
    std::function<std::string(const std::string&)> find = [&](const std::string& p) {
        return parent[p] == p ? p : parent[p] = find(parent[p]);
    };
    for (const auto& [p, c] : t.contracts)
        for (const auto& q : participant_names(c))
            if (parent.count(q)) parent[find(p)] = find(q);
    std::map<std::string, std::string> out;
    for (const auto& [p, _] : t.contracts) out[p] = find(p);
    return out;
}

std::optional<OracleVerdict> find_stuck(const Graph& g)
{
    for (std::size_t i = 0; i < g.states.size(); ++i)
        if (g.edges[i].empty() && !is_terminated(g.states[i]))
            return OracleVerdict{OracleVerdict::Kind::StuckConfig, g.states[i], "no move is possible", 0};
    return std::nullopt;
}

// A live participant P is starved when some cycle avoids P, P cannot move
// anywhere along it, and one of its actors stays connected to P.
std::optional<OracleVerdict> find_starvation(const Graph& g)
{
    if (g.states.empty()) return std::nullopt;
    const std::size_t n = g.states.size();
    for (const auto& [p, _] : g.states.front().contracts) {
        auto allowed = [&](std::size_t i) { return live(g.states[i], p); };
        auto avoids = [&](const Edge& e) { return std::find(e.actors.begin(), e.actors.end(), p) == e.actors.end(); };

        // Tarjan's SCC over the subgraph of states where p is live and edges not by p.
        std::vector<long> idx(n, -1), low(n, 0), comp(n, -1);
        std::vector<bool> on(n, false);
        std::vector<std::size_t> stack;
        long counter = 0, ncomp = 0;
        std::function<void(std::size_t)> strong = [&](std::size_t v) {
            idx[v] = low[v] = counter++;
            stack.push_back(v);
            on[v] = true;
            for (const auto& e : g.edges[v]) {
                if (!avoids(e) || !allowed(e.to)) continue;
                if (idx[e.to] < 0) {
                    strong(e.to);
                    low[v] = std::min(low[v], low[e.to]);
                } else if (on[e.to]) {
                    low[v] = std::min(low[v], idx[e.to]);
                }
            }
            if (low[v] == idx[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = false;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
        };
        for (std::size_t v = 0; v < n; ++v)
            if (allowed(v) && idx[v] < 0) strong(v);

        // Under a fair scheduler p is not starved by a cycle through a state
        // where p itself can move.
        std::vector<bool> p_enabled(static_cast<std::size_t>(ncomp), false);
        for (std::size_t v = 0; v < n; ++v) {
            if (comp[v] < 0) continue;
            for (const auto& e : g.edges[v])
                if (!avoids(e)) p_enabled[comp[v]] = true;
        }

        for (std::size_t v = 0; v < n; ++v) {
            if (comp[v] < 0 || p_enabled[comp[v]]) continue;
            for (const auto& e : g.edges[v]) {
                if (!avoids(e) || comp[e.to] != comp[v]) continue;
                auto groups = residual_components(g.states[v]);
                for (const auto& a : e.actors) {
                    if (groups.at(a) == groups.at(p))
                        return OracleVerdict{OracleVerdict::Kind::CycleWithoutProgress, g.states[v],
                                             p + " never moves while " + a + " cycles", 0};
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace

OracleVerdict execution_oracle(const ContractSystem& t, std::size_t buffer_bound, std::size_t state_budget)
{
    if (buffer_bound == 0) throw Error("buffer bound must be at least 1");
    t.validate();

    Graph async = explore(t, [&](const ContractSystem& s) { return async_successors(s, buffer_bound); }, state_budget);
    Graph sync = explore(t, sync_successors, state_budget);
    std::size_t states = async.states.size() + sync.states.size();
    if (async.truncated || sync.truncated)
        return {OracleVerdict::Kind::BudgetExhausted, t, "state budget exhausted", states};

    for (const Graph* g : {&async, &sync}) {
        if (auto v = find_stuck(*g)) {
            v->states = states;
            return *v;
        }
        if (auto v = find_starvation(*g)) {
            v->states = states;
            return *v;
        }
    }
    return {OracleVerdict::Kind::AllRunsComplete, {}, "", states};
}

const char* to_string(OracleVerdict::Kind k)
{
    switch (k) {
    case OracleVerdict::Kind::AllRunsComplete: return "all-runs-complete";
    case OracleVerdict::Kind::StuckConfig: return "stuck";
    case OracleVerdict::Kind::CycleWithoutProgress: return "cycle-without-progress";
    case OracleVerdict::Kind::BudgetExhausted: return "budget-exhausted";
    }
    return "?";
}

}  // namespace co2
