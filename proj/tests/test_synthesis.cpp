#include "co2/oracle.hpp"
#include "co2/synthesis.hpp"
#include "co2/syntax.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

using namespace co2;

namespace {

ContractSystem sys(const std::string& text) { return ContractSystem::with_empty_queues(parse_named_contracts(text)); }

SynthFailure::Kind failure_of(const std::string& text)
{
    SynthResult r = synthesize(sys(text));
    EXPECT_FALSE(r.ok()) << render(*r.global);
    return r.ok() ? SynthFailure::Kind::Stuck : r.failure->kind;
}

}  // namespace

TEST(Synthesis, StoreAndTwoBuyers)
{
    SynthResult r = synthesize(sys(R"(
A: B1?req . B2?req . B1!quote . (B1?order . B2!ok + B1?bye . B2!bye)
B1: A!req . A?quote . (B2!ok . A!order (+) B2!bye . A!bye)
B2: A!req . (B1?ok . A?ok + B1?bye . A?bye)
)"));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.global, canonicalize(parse_global(
                             "B1 -> A : req ; B2 -> A : req ; A -> B1 : quote ; (B1 -> B2 : ok ; B1 -> A : order ; "
                             "A -> B2 : ok \\/ B1 -> B2 : bye ; B1 -> A : bye ; A -> B2 : bye)")));
}

TEST(Synthesis, StoreAndCombinedBuyer)
{
    SynthResult r = synthesize(sys(R"(
A: B12?req . B12?req . B12!quote . (B12?order . B12!ok + B12?bye . B12!bye)
B12: A!req . A!req . A?quote . A!order . A?ok
)"));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.global,
              canonicalize(parse_global("B12 -> A : req ; B12 -> A : req ; A -> B12 : quote ; B12 -> A : order ; A -> B12 : ok")));
}

TEST(Synthesis, Recursion)
{
    SynthResult r = synthesize(sys("A: rec t . B!ping . B?pong . t\nB: rec u . A?ping . A!pong . u"));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.global, parse_global("rec x0 . A -> B : ping ; B -> A : pong ; x0"));

    r = synthesize(sys("A: rec t . (B!more . t (+) B!stop)\nB: rec u . (A?more . u + A?stop)"));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.global, canonicalize(parse_global("rec x . (A -> B : more ; x \\/ A -> B : stop)")));
}

TEST(Synthesis, IndependentPairsRunInParallel)
{
    SynthResult r = synthesize(sys("A: B!a\nB: A?a\nC: D!b\nD: C?b"));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.global, parse_global("A -> B : a || C -> D : b"));
}

TEST(Synthesis, Failures)
{
    EXPECT_EQ(failure_of("A: B!int\nB: A?bool"), SynthFailure::Kind::Stuck);
    EXPECT_EQ(failure_of("A: B?x\nB: A?y"), SynthFailure::Kind::Stuck);
    EXPECT_EQ(failure_of("A: B!a (+) B!b\nB: A?a"), SynthFailure::Kind::MixedRace);
    // A's message is never consumed: B loops with C forever.
    EXPECT_EQ(failure_of("A: B!b\nB: rec t . C!b . t\nC: rec t . B?b . t"), SynthFailure::Kind::NotProjectable);

    SynthOptions tiny;
    tiny.budget = 2;
    SynthResult r = synthesize(sys("A: B!a . B!b . B!c\nB: A?a . A?b . A?c"), tiny);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.failure->kind, SynthFailure::Kind::Unbounded);
}

TEST(Synthesis, StuckConfigurationIsReported)
{
    SynthResult r = synthesize(sys("A: B!a . B!b\nB: A?a . A?c"));
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.failure->kind, SynthFailure::Kind::Stuck);
    EXPECT_EQ(r.failure->config.contracts.at("A"), parse_contract("B!b"));
    EXPECT_EQ(r.failure->config.contracts.at("B"), parse_contract("A?c"));
}

TEST(Synthesis, RejectsNonEmptyQueuesAndOpenContracts)
{
    ContractSystem t = sys("A: B!a\nB: A?a");
    t.queues[{"A", "B"}] = {Sort{"a"}};
    EXPECT_THROW(synthesize(t), Error);
    EXPECT_THROW(synthesize(ContractSystem::with_empty_queues({{"A", parse_contract("b!x")}, {"B", parse_contract("A?x")}})),
                 Error);
}

TEST(Synthesis, Compliant)
{
    EXPECT_TRUE(compliant(parse_named_contracts("A: B!a\nB: A?a")));
    EXPECT_FALSE(compliant(parse_named_contracts("A: B!a\nB: A?b")));
}

TEST(SynthesisProperty, SuccessesProjectBackAndComplete)
{
    gen::Generator g(21);
    int ok = 0;
    for (int i = 0; i < 3000; ++i) {
        auto contracts = (i % 2) ? g.random_system() : g.projected_system().value_or(g.random_system());
        ContractSystem t = ContractSystem::with_empty_queues(contracts);
        SynthResult r = synthesize(t);
        if (!r.ok()) continue;
        ++ok;
        EXPECT_TRUE(well_formed(*r.global)) << render(*r.global);
        EXPECT_EQ(canonicalize(*r.global), *r.global);
        for (const auto& [p, c] : contracts) EXPECT_TRUE(conforms(project(*r.global, p), c)) << render(*r.global);
        EXPECT_TRUE(execution_oracle(t, 1).complete()) << render(t);
    }
    EXPECT_GT(ok, 300);
}

TEST(SynthesisProperty, SynthesisIsDeterministic)
{
    gen::Generator g(5);
    for (int i = 0; i < 300; ++i) {
        ContractSystem t = ContractSystem::with_empty_queues(g.random_system());
        SynthResult a = synthesize(t), b = synthesize(t);
        ASSERT_EQ(a.ok(), b.ok());
        if (a.ok()) EXPECT_EQ(*a.global, *b.global);
    }
}
