#include "co2/choreo.hpp"
#include "co2/syntax.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

using namespace co2;

namespace {

const char* store_global =
    "B1 -> A : req ; B2 -> A : req ; A -> B1 : quote ; "
    "(B1 -> B2 : ok ; B1 -> A : order ; A -> B2 : ok \\/ B1 -> B2 : bye ; B1 -> A : bye ; A -> B2 : bye)";

}  // namespace

TEST(Choreo, ProjectsTheStoreChoreography)
{
    GlobalType g = parse_global(store_global);
    EXPECT_EQ(project(g, "A"), parse_contract("B1?req . B2?req . B1!quote . (B1?order . B2!ok + B1?bye . B2!bye)"));
    EXPECT_EQ(project(g, "B1"), parse_contract("A!req . A?quote . (B2!ok . A!order (+) B2!bye . A!bye)"));
    EXPECT_EQ(project(g, "B2"), parse_contract("A!req . (B1?ok . A?ok + B1?bye . A?bye)"));
    EXPECT_EQ(project(g, "C"), Contract::end());
    EXPECT_EQ(choice_decider(g.cont().cont().cont()), "B1");
}

TEST(Choreo, WellFormedness)
{
    EXPECT_TRUE(well_formed(parse_global(store_global)));
    EXPECT_TRUE(well_formed(parse_global("rec x . A -> B : ping ; B -> A : pong ; x")));
    // No unique decider.
    EXPECT_FALSE(well_formed(parse_global("A -> B : a \\/ B -> A : b")));
    // Same selection twice.
    EXPECT_FALSE(well_formed(parse_global("A -> B : a ; B -> A : x \\/ A -> B : a ; B -> A : y")));
    // Unguarded and free variables.
    EXPECT_FALSE(well_formed(GlobalType::rec("x", GlobalType::var("x"))));
    EXPECT_FALSE(well_formed(GlobalType::var("x")));
    // Parallel threads must not share participants.
    EXPECT_FALSE(well_formed(parse_global("A -> B : a || B -> C : b")));
    EXPECT_TRUE(well_formed(parse_global("A -> B : a || C -> D : b")));
    // C cannot tell which branch was taken.
    EXPECT_FALSE(well_formed(parse_global("A -> B : a ; C -> A : z \\/ A -> B : b")));
    // ...unless B tells it.
    EXPECT_TRUE(well_formed(parse_global("A -> B : a ; B -> C : x \\/ A -> B : b ; B -> C : y ; C -> A : z")));
}

TEST(Choreo, MessagesNeedDistinctEnds)
{
    EXPECT_THROW(GlobalType::msg("A", "A", Sort{"x"}, {}), Error);
    EXPECT_THROW(GlobalType::choice({GlobalType::end()}), Error);
}

TEST(Choreo, CanonicalizeSortsAndRenames)
{
    GlobalType a = parse_global("B -> A : y \\/ B -> A : x");
    GlobalType b = parse_global("B -> A : x \\/ B -> A : y");
    EXPECT_EQ(canonicalize(a), canonicalize(b));
    EXPECT_EQ(canonicalize(parse_global("rec foo . A -> B : p ; foo")), parse_global("rec x0 . A -> B : p ; x0"));
    EXPECT_EQ(canonicalize(parse_global("rec foo . A -> B : p")), parse_global("A -> B : p"));
    EXPECT_EQ(canonicalize(parse_global("C -> D : b || A -> B : a")), parse_global("A -> B : a || C -> D : b"));
}

TEST(Choreo, RecursionQueries)
{
    GlobalType pp = parse_global("rec x . A -> B : ping ; B -> A : pong ; x");
    EXPECT_TRUE(has_recursion(pp));
    EXPECT_FALSE(has_end(pp));
    EXPECT_EQ(participants(pp), (std::set<std::string>{"A", "B"}));
    GlobalType mixed = parse_global("rec x . (A -> B : more ; x \\/ A -> B : stop)");
    EXPECT_TRUE(has_recursion(mixed));
    EXPECT_TRUE(has_end(mixed));
    EXPECT_FALSE(has_recursion(parse_global(store_global)));
}

TEST(ChoreoProperty, CanonicalizeIdempotentAndProjectionStable)
{
    gen::Generator g(3);
    int well = 0;
    for (int i = 0; i < 1000; ++i) {
        auto ps = g.names(2 + g.pick(3));
        GlobalType t = g.global(ps, 4);
        GlobalType c = canonicalize(t);
        EXPECT_EQ(canonicalize(c), c);
        EXPECT_EQ(parse_global(render(c)), c) << render(c);
        EXPECT_EQ(has_end(c), has_end(t));
        EXPECT_EQ(bool(well_formed(c)), bool(well_formed(t))) << render(t);
        if (!well_formed(t)) continue;
        ++well;
        for (const auto& p : ps) EXPECT_TRUE(equivalent(project(t, p), project(c, p))) << render(t) << " @" << p;
    }
    EXPECT_GT(well, 100);
}
