#include "co2/analysis.hpp"
#include "co2/system_io.hpp"
#include "co2/syntax.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace co2;

namespace {

Co2System load(const std::string& name)
{
    std::ifstream in(std::filesystem::path(CO2_FIXTURES) / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return normalize(parse_system(ss.str()));
}

Interaction snd(std::string peer, std::string sort) { return {std::move(peer), Sort{std::move(sort)}, Dir::Send}; }
Interaction rcv(std::string peer, std::string sort) { return {std::move(peer), Sort{std::move(sort)}, Dir::Recv}; }

// The store system right after the fuse, before B1's internal step.
Co2System store_after_fuse()
{
    Co2System s = load("s1.co2");
    for (;;) {
        auto steps = enabled_steps(s);
        auto it = std::find_if(steps.begin(), steps.end(), [](const StepRef& r) { return r.kind == StepKind::Tell; });
        if (it == steps.end()) break;
        s = fire(s, *it).first;
    }
    for (const auto& r : enabled_steps(s))
        if (r.kind == StepKind::Fuse) return fire(s, r).first;
    ADD_FAILURE() << "no fuse";
    return s;
}

bool subset(const ReadySet& a, const ReadySet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

}  // namespace

TEST(Analysis, ReadySetsAfterFuse)
{
    Co2System s = store_after_fuse();
    ASSERT_TRUE(s.sessions.count("s1"));
    EXPECT_EQ(culpable(s, "s1"), (std::set<std::string>{"B1", "B2"}));
    EXPECT_EQ(process_ready_set(s, "A", "s1"), ReadySet{rcv("B1", "req")});
    EXPECT_TRUE(process_ready_set(s, "B1", "s1").empty());
    EXPECT_EQ(process_ready_set(s, "B2", "s1"), ReadySet{snd("A", "req")});

    WeakReadySet w = weak_process_ready_set(s, "B1", "s1", 100);
    EXPECT_EQ(w.pairs, ReadySet{snd("A", "req")});
    EXPECT_FALSE(w.truncated);

    for (const char* p : {"A", "B1", "B2"}) {
        Readiness r = ready(s, p);
        EXPECT_EQ(r.verdict, Tri::True) << p;
        ASSERT_EQ(r.reports.size(), 1u);
        EXPECT_EQ(r.reports[0].session, "s1");
    }
    EXPECT_THROW(culpable(s, "nope"), Error);
}

TEST(Analysis, StuckStoreBlamesB1)
{
    Co2System s = load("s1_stuck.co2");
    EXPECT_EQ(culpable(s, "s"), std::set<std::string>{"B1"});
    Readiness r = ready(s, "B1");
    EXPECT_EQ(r.verdict, Tri::False);
    ASSERT_EQ(r.reports.size(), 1u);
    const ReadySetReport& rep = r.reports[0];
    EXPECT_EQ(rep.process_ready_set, ReadySet{snd("A", "order")});
    EXPECT_EQ(rep.contract_ready_sets, (std::set<ReadySet>{{snd("B2", "bye")}, {snd("B2", "ok")}}));
    EXPECT_EQ(ready(s, "A").verdict, Tri::True);
    EXPECT_EQ(ready(s, "B2").verdict, Tri::True);
    EXPECT_FALSE(is_initial_for(s, "A"));
    EXPECT_THROW(check_honesty(s, "A"), PreconditionError);

    auto j = to_json(rep);
    EXPECT_EQ(j["participant"], "B1");
}

TEST(Analysis, TruncatedSearchIsUnknown)
{
    Co2System s = store_after_fuse();
    WeakReadySet w = weak_process_ready_set(s, "B1", "s1", 1);
    EXPECT_TRUE(w.truncated);
    EXPECT_TRUE(w.pairs.empty());
    EXPECT_EQ(ready(s, "B1", 1).verdict, Tri::Unknown);
    EXPECT_STREQ(to_string(Tri::Unknown), "unknown");
}

TEST(Analysis, TerminatedSessionsAreReady)
{
    Co2System s = load("do_example.co2");
    while (!enabled_steps(s).empty()) s = fire(s, enabled_steps(s).front()).first;
    EXPECT_TRUE(culpable(s, "s").empty());
    WeakReadySet w = weak_process_ready_set(s, "A", "s", 100);
    EXPECT_TRUE(w.pairs.empty());
    EXPECT_EQ(ready(s, "A").verdict, Tri::True);
    EXPECT_EQ(ready(s, "B").verdict, Tri::True);
}

TEST(Analysis, HonestyOfTheStore)
{
    Co2System s = load("s1.co2");
    HonestyVerdict b1 = check_honesty(s, "B1");
    ASSERT_EQ(b1.kind, HonestyVerdict::Kind::ViolationFound);
    ASSERT_TRUE(b1.report);
    EXPECT_EQ(b1.report->ready, Tri::False);
    auto states = replay(s, b1.trace);
    EXPECT_EQ(exploration_key(states.back()), exploration_key(b1.state));
    EXPECT_EQ(ready(states.back(), "B1").verdict, Tri::False);
    EXPECT_EQ(to_json(b1)["result"], "violation-found");

    for (const char* p : {"A", "B2"}) {
        HonestyVerdict v = check_honesty(s, p);
        EXPECT_EQ(v.kind, HonestyVerdict::Kind::NoViolationUpToBound) << p;
        EXPECT_TRUE(v.exhaustive);
        EXPECT_EQ(v.unknown_states, 0u);
        EXPECT_EQ(to_json(v)["result"], "no-violation-up-to-bound");
    }
}

TEST(Analysis, HonestyAcrossSessions)
{
    Co2System bad = load("multi.co2");
    EXPECT_EQ(check_honesty(bad, "A").kind, HonestyVerdict::Kind::ViolationFound);
    EXPECT_EQ(check_honesty(bad, "B").kind, HonestyVerdict::Kind::ViolationFound);
    EXPECT_EQ(check_honesty(bad, "C").kind, HonestyVerdict::Kind::NoViolationUpToBound);

    Co2System good = load("multi_honest.co2");
    for (const char* p : {"A", "B", "C"}) {
        HonestyVerdict v = check_honesty(good, p);
        EXPECT_EQ(v.kind, HonestyVerdict::Kind::NoViolationUpToBound) << p;
        EXPECT_TRUE(v.exhaustive) << p;
    }
    EXPECT_EQ(check_honesty(load("pingpong.co2"), "A").kind, HonestyVerdict::Kind::NoViolationUpToBound);
}

TEST(Analysis, TracePropertiesOfAStuckRun)
{
    Co2System s = load("multi.co2");
    Trace t = run(s, {4});
    PropertyReport r = check_trace_properties(t.steps, s);
    ASSERT_FALSE(r.ok());
    std::map<std::string, std::set<std::string>> blamed;
    for (const auto& v : r.violations) {
        EXPECT_EQ(v.kind, PropertyViolation::Kind::Progress);
        blamed[v.session] = v.culpable;
    }
    EXPECT_EQ(blamed, r.culpable_at_end);
    EXPECT_EQ(r.steps, t.steps.size());
    std::set<std::set<std::string>> sets;
    for (const auto& [sess, who] : blamed) sets.insert(who);
    EXPECT_EQ(sets, (std::set<std::set<std::string>>{{"A"}, {"B"}}));

    Co2System h = load("multi_honest.co2");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        PropertyReport ok = check_trace_properties(run(h, {seed}).steps, h);
        EXPECT_TRUE(ok.ok()) << seed;
        for (const auto& [sess, done] : ok.sessions_terminated) EXPECT_TRUE(done) << sess;
    }

    auto bad = t.steps;
    bad.back().digest = "ffffffffffffffff";
    EXPECT_THROW(check_trace_properties(bad, s), ReplayError);
}

TEST(Analysis, TheoremsOnFixtures)
{
    for (const char* f : {"s1.co2", "s2.co2", "s12.co2", "s1_stuck.co2", "multi.co2", "multi_honest.co2", "subset.co2",
                          "group.co2", "do_example.co2", "pingpong.co2"}) {
        TheoremReport r = check_theorems(load(f), 5000);
        EXPECT_TRUE(r.violations.empty()) << f;
        EXPECT_FALSE(r.truncated) << f;
    }
    EXPECT_FALSE(check_theorems(load("multi.co2")).stuck.empty());
    EXPECT_TRUE(check_theorems(load("multi_honest.co2")).stuck.empty());

    EXPECT_TRUE(check_exculpation(load("multi_honest.co2")).violations.empty());
    EXPECT_TRUE(check_exculpation(load("s1.co2")).violations.size() > 0);
}

TEST(Analysis, ExplorationTraces)
{
    Co2System s = load("s1.co2");
    Exploration e = explore(s, 1000);
    EXPECT_FALSE(e.truncated);
    ASSERT_GT(e.states.size(), 10u);
    for (std::size_t i : {std::size_t{0}, e.states.size() / 2, e.states.size() - 1}) {
        auto steps = trace_to(e, i);
        EXPECT_EQ(steps.size(), e.states[i].depth);
        EXPECT_EQ(exploration_key(replay(s, steps).back()), exploration_key(e.states[i].system));
    }
    EXPECT_TRUE(explore(s, 5).truncated);
}

TEST(AnalysisProperty, WeakReadySetsContainReadySetsAndGrow)
{
    gen::Generator g(31);
    int checked = 0;
    for (int i = 0; i < 120; ++i) {
        Exploration e = explore(g.system(), 40);
        for (const auto& st : e.states)
            for (const auto& [name, sess] : st.system.sessions)
                for (const auto& [who, c] : sess.contracts) {
                    ReadySet rdo = process_ready_set(st.system, who, name);
                    WeakReadySet small = weak_process_ready_set(st.system, who, name, 5);
                    WeakReadySet big = weak_process_ready_set(st.system, who, name, 200);
                    EXPECT_TRUE(subset(rdo, small.pairs));
                    EXPECT_TRUE(subset(small.pairs, big.pairs));
                    if (!small.truncated) EXPECT_EQ(small.pairs, big.pairs);
                    ++checked;
                }
    }
    EXPECT_GT(checked, 100);
}

TEST(AnalysisProperty, TheoremsHoldOnGeneratedSystems)
{
    gen::Generator g(37);
    for (int i = 0; i < 150; ++i) {
        Co2System s = g.system();
        TheoremReport r = check_theorems(s, 400);
        EXPECT_TRUE(r.violations.empty()) << render_system(s);
        PropertyReport p = check_trace_properties(run(s, {std::uint64_t(i), 80}).steps, s);
        for (const auto& v : p.violations) EXPECT_EQ(v.kind, PropertyViolation::Kind::Progress) << render_system(s);
    }
}

TEST(AnalysisProperty, HonestyWitnessesReplay)
{
    const std::vector<std::string> as = {"do x B!int",          "do x B!bool", "tau . do x B!int", "tau . 0",
                                         "do x B!int + do x B!bool", "do x B!bool + tau . do x B!int"};
    const std::vector<std::string> bs = {"do y A?int", "tau . 0", "do y A?int + tau . do y A?int", "do y A?bool"};
    int found = 0;
    for (const auto& pa : as)
        for (const auto& pb : bs) {
            Co2System s = normalize(parse_system("participant A { tell A @x { B!int } . fuse . (" + pa +
                                                 ") }\nparticipant B { tell A @y { A?int } . (" + pb + ") }"));
            for (const char* who : {"A", "B"}) {
                HonestyVerdict v = check_honesty(s, who);
                EXPECT_TRUE(v.exhaustive || v.kind == HonestyVerdict::Kind::ViolationFound);
                if (v.kind != HonestyVerdict::Kind::ViolationFound) continue;
                ++found;
                auto states = replay(s, v.trace);
                EXPECT_EQ(ready(states.back(), who).verdict, Tri::False) << pa << " | " << pb << " @" << who;
            }
            bool a_bad = pa == "do x B!bool" || pa == "tau . 0";
            bool b_bad = pb == "tau . 0" || pb == "do y A?bool";
            EXPECT_EQ(check_honesty(s, "A").kind == HonestyVerdict::Kind::ViolationFound, a_bad) << pa;
            EXPECT_EQ(check_honesty(s, "B").kind == HonestyVerdict::Kind::ViolationFound, b_bad) << pb;
        }
    EXPECT_EQ(found, 20);
}
