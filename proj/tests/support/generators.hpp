#pragma once

// Random term generators for the property and acceptance suites.

#include "co2/choreo.hpp"
#include "co2/contract.hpp"
#include "co2/runtime.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace co2::gen {

struct Limits {
    int participants = 3;
    int sorts = 2;
    int depth = 4;
    int binders = 1;
};

class Generator {
public:
    explicit Generator(std::uint64_t seed, Limits limits = {}) : rng_(seed), limits_(limits) {}

    std::mt19937_64& rng() { return rng_; }

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    std::vector<std::string> names(int n) const
    {
        std::vector<std::string> out;
        for (int i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
        return out;
    }

    Sort sort() { return Sort{std::string(1, static_cast<char>('a' + pick(limits_.sorts)))}; }

    // A closed, guarded contract for `self` talking to `peers`.
    Contract contract(const std::string& self, const std::vector<std::string>& peers)
    {
        binders_left_ = limits_.binders;
        return contract_at(self, peers, limits_.depth, {}, false);
    }

    std::map<std::string, Contract> random_system()
    {
        int n = 2 + pick(limits_.participants - 1);
        auto ps = names(n);
        std::map<std::string, Contract> out;
        for (const auto& p : ps) {
            std::vector<std::string> peers;
            for (const auto& q : ps)
                if (q != p) peers.push_back(q);
            out.emplace(p, contract(p, peers));
        }
        return out;
    }

    // A random global type over the given participants; may be ill-formed.
    GlobalType global(const std::vector<std::string>& ps, int depth, std::vector<std::string> vars = {},
                      bool guarded = false)
    {
        if (depth <= 0) {
            if (!vars.empty() && guarded && coin()) return GlobalType::var(vars[pick(static_cast<int>(vars.size()))]);
            return GlobalType::end();
        }
        int roll = pick(10);
        if (roll == 0) return GlobalType::end();
        if (roll == 1 && !vars.empty() && guarded) return GlobalType::var(vars.back());
        if (roll == 2 && vars.size() < static_cast<std::size_t>(limits_.binders)) {
            vars.push_back("r" + std::to_string(vars.size()));
            return GlobalType::rec(vars.back(), global(ps, depth, vars, false));
        }
        auto [from, to] = pair(ps);
        if (roll <= 5) {
            std::vector<GlobalType> alts;
            std::set<std::pair<std::string, Sort>> used;
            int k = 2;
            for (int i = 0; i < k; ++i) {
                std::string dest = ps[pick(static_cast<int>(ps.size()))];
                if (dest == from) dest = to;
                Sort s = sort();
                if (!used.insert({dest, s}).second) continue;
                alts.push_back(GlobalType::msg(from, dest, s, global(ps, depth - 1, vars, true)));
            }
            if (alts.size() == 1) return alts.front();
            return GlobalType::choice(std::move(alts));
        }
        return GlobalType::msg(from, to, sort(), global(ps, depth - 1, vars, true));
    }

    // Projections of a random well-formed global type, occasionally mutated.
    std::optional<std::map<std::string, Contract>> projected_system(double mutate = 0.3)
    {
        int n = 2 + pick(limits_.participants - 1);
        auto ps = names(n);
        GlobalType g = global(ps, limits_.depth);
        if (!well_formed(g)) return std::nullopt;
        std::map<std::string, Contract> out;
        for (const auto& p : ps) out.emplace(p, project(g, p));
        if (coin(mutate)) {
            auto it = out.begin();
            std::advance(it, pick(static_cast<int>(out.size())));
            std::vector<std::string> peers;
            for (const auto& q : ps)
                if (q != it->first) peers.push_back(q);
            it->second = mutate_contract(it->second, it->first, peers);
        }
        return out;
    }

    Contract mutate_contract(const Contract& c, const std::string& self, const std::vector<std::string>& peers)
    {
        switch (c.kind()) {
        case Contract::Kind::Send: {
            auto branches = c.send_branches();
            auto& b = branches[pick(static_cast<int>(branches.size()))];
            if (coin()) {
                b.cont = mutate_contract(b.cont, self, peers);
            } else {
                b.sort = sort();
            }
            return dedup_send(std::move(branches));
        }
        case Contract::Kind::Recv: {
            auto branches = c.recv_branches();
            auto& b = branches[pick(static_cast<int>(branches.size()))];
            if (coin()) {
                b.cont = mutate_contract(b.cont, self, peers);
            } else {
                b.sort = sort();
            }
            return dedup_recv(c.recv_from(), std::move(branches));
        }
        case Contract::Kind::Rec:
            return Contract::rec(c.rec_var(), mutate_contract(c.rec_body(), self, peers));
        case Contract::Kind::End:
            return Contract::send({{PartRef::name(peers[pick(static_cast<int>(peers.size()))]), sort(), Contract::end()}});
        case Contract::Kind::Var:
            return c;
        }
        return c;
    }

    // A random source-level system: processes over the participants, one
    // declared session, a pool and a definition. Free session variables only
    // occur in tells and pools; participant variables only in contracts.
    Co2System system()
    {
        Co2System s;
        auto ps = names(2 + pick(limits_.participants - 1));
        s.definitions["Loop"] = Definition{{"u"}, {}, Process::prefixed(Prefix::tau(), Process::call("Loop", {SessionRef::var("u")}, {}))};
        s.sessions["s"] = ContractSystem::with_empty_queues(
            {{ps[0], Contract::send({{PartRef::name(ps[1]), sort(), {}}})},
             {ps[1], Contract::recv(PartRef::name(ps[0]), {{Sort{"a"}, {}}, {Sort{"b"}, {}}})}});
        if (coin()) s.sessions["s"].queues[{ps[1], ps[0]}] = {sort()};
        for (const auto& p : ps) s.processes[p] = {process(p, ps, {"s"}, 3, true)};
        if (coin()) {
            Contract c = Contract::send({{PartRef::var("a"), sort(), {}}});
            s.pools[ps[0]] = {LatentContract{ps.back(), SessionRef::var("k"), c}};
        }
        if (coin()) s.default_policy.min_participants = 3;
        if (coin(0.2)) s.order = AgreementOrder::SmallestFirst;
        return s;
    }

    Process process(const std::string& self, const std::vector<std::string>& ps, std::vector<std::string> sessions,
                    int depth, bool top)
    {
        if (depth <= 0) return Process::nil();
        int roll = pick(top ? 8 : 7);
        if (roll == 7) {
            std::vector<Process> parts;
            for (int i = 0, n = 2 + pick(2); i < n; ++i) parts.push_back(sum(self, ps, sessions, depth - 1));
            return Process::par(std::move(parts));
        }
        if (roll == 6) {
            std::string v = "v" + std::to_string(depth);
            sessions.push_back(v);
            std::vector<std::string> pv;
            if (coin()) pv.push_back("p" + std::to_string(depth));
            return Process::delim({v}, pv, sum(self, ps, sessions, depth - 1));
        }
        if (roll == 5) {
            std::string sess = sessions[pick(static_cast<int>(sessions.size()))];
            return Process::call("Loop", {sess == "s" ? SessionRef::name(sess) : SessionRef::var(sess)}, {});
        }
        if (roll == 4) return Process::nil();
        return sum(self, ps, sessions, depth);
    }

private:
    std::mt19937_64 rng_;
    Limits limits_;
    int binders_left_ = 0;

    std::pair<std::string, std::string> pair(const std::vector<std::string>& ps)
    {
        int i = pick(static_cast<int>(ps.size()));
        int j = pick(static_cast<int>(ps.size()) - 1);
        if (j >= i) ++j;
        return {ps[i], ps[j]};
    }

    static Contract dedup_send(std::vector<SendBranch> branches)
    {
        std::vector<SendBranch> out;
        for (auto& b : branches) {
            bool dup = false;
            for (const auto& o : out) dup = dup || (o.to == b.to && o.sort == b.sort);
            if (!dup) out.push_back(std::move(b));
        }
        return Contract::send(std::move(out));
    }

    static Contract dedup_recv(const PartRef& from, std::vector<RecvBranch> branches)
    {
        std::vector<RecvBranch> out;
        for (auto& b : branches) {
            bool dup = false;
            for (const auto& o : out) dup = dup || o.sort == b.sort;
            if (!dup) out.push_back(std::move(b));
        }
        return Contract::recv(from, std::move(out));
    }

    Process sum(const std::string& self, const std::vector<std::string>& ps, const std::vector<std::string>& sessions,
                int depth)
    {
        std::vector<SumBranch> branches;
        for (int i = 0, n = 1 + pick(2); i < n; ++i) {
            std::string peer = ps[pick(static_cast<int>(ps.size()))];
            if (peer == self) peer = ps[(std::find(ps.begin(), ps.end(), self) - ps.begin() + 1) % ps.size()];
            std::string sess = sessions[pick(static_cast<int>(sessions.size()))];
            SessionRef ref = sess == "s" ? SessionRef::name(sess) : SessionRef::var(sess);
            Prefix p;
            switch (pick(4)) {
            case 0: p = Prefix::tau(); break;
            case 1: p = Prefix::tell(PartRef::name(peer), "t" + std::to_string(pick(2)), Contract::send({{PartRef::var("q"), sort(), {}}})); break;
            case 2: p = coin() ? Prefix::fuse() : Prefix::fuse(FusePolicy{3, FuseMode::Terminating}); break;
            default: p = Prefix::act(ref, PartRef::name(peer), sort(), coin() ? Dir::Send : Dir::Recv); break;
            }
            branches.push_back({p, process(self, ps, sessions, depth - 1, false)});
        }
        return Process::sum(std::move(branches));
    }

    Contract contract_at(const std::string& self, const std::vector<std::string>& peers, int depth,
                         std::vector<std::string> vars, bool guarded)
    {
        if (depth <= 0) {
            if (!vars.empty() && guarded && coin()) return Contract::var(vars.back());
            return Contract::end();
        }
        int roll = pick(10);
        if (roll == 0) return Contract::end();
        if (roll == 1 && !vars.empty() && guarded) return Contract::var(vars.back());
        if (roll == 2 && binders_left_ > 0) {
            --binders_left_;
            vars.push_back("x");
            return Contract::rec("x", contract_at(self, peers, depth, vars, false));
        }
        int k = 1 + pick(2);
        if (roll <= 6) {
            std::vector<SendBranch> branches;
            for (int i = 0; i < k; ++i)
                branches.push_back({PartRef::name(peers[pick(static_cast<int>(peers.size()))]), sort(),
                                    contract_at(self, peers, depth - 1, vars, true)});
            return dedup_send(std::move(branches));
        }
        PartRef from = PartRef::name(peers[pick(static_cast<int>(peers.size()))]);
        std::vector<RecvBranch> branches;
        for (int i = 0; i < k; ++i) branches.push_back({sort(), contract_at(self, peers, depth - 1, vars, true)});
        return dedup_recv(from, std::move(branches));
    }
};

}  // namespace co2::gen
