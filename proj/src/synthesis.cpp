#include "co2/synthesis.hpp"

#include <functional>
#include <set>
#include <vector>

namespace co2 {

namespace {

using Config = std::map<std::string, Contract>;

struct Abort {
    SynthFailure failure;
};

class Synthesizer {
public:
    explicit Synthesizer(std::size_t budget) : budget_(budget) {}

    GlobalType run(const Config& config) { return synth(config); }

private:
    struct Binding {
        std::string var;
        bool used = false;
    };

    std::size_t budget_;
    std::size_t visited_ = 0;
    std::size_t next_var_ = 0;
    std::map<Config, Binding> env_;

    static Config key_of(const Config& config)
    {
        Config key;
        for (const auto& [p, c] : config) key.emplace(p, canonical(c));
        return key;
    }

    [[noreturn]] static void fail(SynthFailure::Kind kind, std::string detail, const Config& config)
    {
        throw Abort{{kind, std::move(detail), ContractSystem::with_empty_queues(config)}};
    }

    static std::vector<Config> components(const Config& config)
    {
        std::vector<std::string> live;
        for (const auto& [p, c] : config)
            if (!unfold_head(c).is_end()) live.push_back(p);

        std::map<std::string, std::string> parent;
        for (const auto& p : live) parent[p] = p;
        std::function<std::string(const std::string&)> find = [&](const std::string& p) {
            return parent[p] == p ? p : parent[p] = find(parent[p]);
        };
        for (const auto& p : live)
            for (const auto& q : participant_names(config.at(p)))
                if (parent.count(q)) parent[find(p)] = find(q);

        std::map<std::string, Config> groups;
        for (const auto& p : live) groups[find(p)].emplace(p, config.at(p));
        std::vector<Config> out;
        for (auto& [root, g] : groups) out.push_back(std::move(g));
        return out;
    }

    GlobalType synth(const Config& config)
    {
        bool all_end = true;
        for (const auto& [p, c] : config)
            if (!unfold_head(c).is_end()) all_end = false;
        if (all_end) return GlobalType::end();

        Config key = key_of(config);
        if (auto it = env_.find(key); it != env_.end()) {
            it->second.used = true;
            return GlobalType::var(it->second.var);
        }
        if (++visited_ > budget_)
            fail(SynthFailure::Kind::Unbounded, "configuration budget of " + std::to_string(budget_) + " exceeded",
                 config);

        std::string var = "t" + std::to_string(next_var_++);
        env_.emplace(key, Binding{var, false});
        GlobalType body;
        try {
            body = step(config);
        } catch (...) {
            env_.erase(key);
            throw;
        }
        bool used = env_.at(key).used;
        env_.erase(key);
        return used ? GlobalType::rec(var, body) : body;
    }

    GlobalType step(const Config& config)
    {
        auto parts = components(config);
        if (parts.size() > 1) {
            std::vector<GlobalType> threads;
            for (const auto& part : parts) threads.push_back(synth(part));
            return GlobalType::par(std::move(threads));
        }

        std::map<std::string, Contract> heads;
        for (const auto& [p, c] : config) heads.emplace(p, unfold_head(c));

        std::string partial;
        for (const auto& [x, head] : heads) {
            if (head.kind() != Contract::Kind::Send) continue;
            bool all = true;
            bool some = false;
            for (const auto& br : head.send_branches()) {
                bool matched = false;
                if (br.to.is_name() && heads.count(br.to.id)) {
                    const Contract& peer = heads.at(br.to.id);
                    if (peer.kind() == Contract::Kind::Recv && peer.recv_from() == PartRef::name(x))
                        for (const auto& rb : peer.recv_branches())
                            if (rb.sort == br.sort) matched = true;
                }
                if (matched)
                    some = true;
                else
                    all = false;
            }
            if (!all) {
                if (some && partial.empty()) partial = x;
                continue;
            }

            std::vector<GlobalType> alternatives;
            for (const auto& br : head.send_branches()) {
                const Contract& peer = heads.at(br.to.id);
                Config next = config;
                next[x] = br.cont;
                for (const auto& rb : peer.recv_branches())
                    if (rb.sort == br.sort) next[br.to.id] = rb.cont;
                alternatives.push_back(GlobalType::msg(x, br.to.id, br.sort, synth(next)));
            }
            if (alternatives.size() == 1) return alternatives.front();
            return GlobalType::choice(std::move(alternatives));
        }

        if (!partial.empty())
            fail(SynthFailure::Kind::MixedRace,
                 "only some of the sends offered by " + partial + " can be received", config);
        fail(SynthFailure::Kind::Stuck, "no participant can perform a matched send", config);
    }
};

}  // namespace

SynthResult synthesize(const ContractSystem& t, const SynthOptions& options)
{
    t.validate();
    for (const auto& [ch, q] : t.queues)
        if (!q.empty()) throw Error("synthesis requires empty queues");

    SynthResult result;
    GlobalType g;
    try {
        g = Synthesizer(options.budget).run(t.contracts);
    } catch (const Abort& a) {
        result.failure = a.failure;
        return result;
    }
    g = canonicalize(g);

    auto wf = well_formed(g);
    std::string detail;
    if (!wf) {
        for (const auto& d : wf.diagnostics) detail += (detail.empty() ? "" : "; ") + d;
    } else {
        for (const auto& [p, c] : t.contracts) {
            if (!conforms(project(g, p), c)) {
                detail = "projection of the synthesized type does not match the contract of " + p;
                break;
            }
        }
    }
    if (!detail.empty()) {
        result.failure = SynthFailure{SynthFailure::Kind::NotProjectable, detail, {}};
        return result;
    }
    result.global = g;
    return result;
}

bool compliant(const std::map<std::string, Contract>& contracts, const SynthOptions& options)
{
    return synthesize(ContractSystem::with_empty_queues(contracts), options).ok();
}

const char* to_string(SynthFailure::Kind k)
{
    switch (k) {
    case SynthFailure::Kind::Stuck: return "stuck";
    case SynthFailure::Kind::MixedRace: return "mixed-race";
    case SynthFailure::Kind::NotProjectable: return "not-projectable";
    case SynthFailure::Kind::Unbounded: return "unbounded";
    }
    return "?";
}

}  // namespace co2
