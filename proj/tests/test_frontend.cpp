#include "co2/syntax.hpp"
#include "co2/system_io.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace co2;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Diagnostic> diagnostics_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ParseError& e) {
        return e.diagnostics();
    }
    return {};
}

bool span_inside(const Span& s, const std::string& text)
{
    int lines = 1 + static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    return s.line >= 1 && s.line <= lines && s.col >= 1 && s.end_line >= s.line && s.end_line <= lines;
}

void expect_system_error(const std::string& text, const std::string& fragment)
{
    auto ds = diagnostics_of([&] { parse_system(text); });
    ASSERT_FALSE(ds.empty()) << text;
    EXPECT_NE(ds.front().message.find(fragment), std::string::npos) << ds.front().message;
    for (const auto& d : ds) EXPECT_TRUE(span_inside(d.span, text)) << format_diagnostic(d);
}

}  // namespace

TEST(Frontend, StoreContract)
{
    Contract c = parse_contract("b1?req . b2?req . b1!quote . (b1?order . b2!ok + b1?bye . b2!bye)");
    ASSERT_EQ(c.kind(), Contract::Kind::Recv);
    EXPECT_EQ(c.recv_from(), PartRef::var("b1"));
    EXPECT_EQ(parse_contract("end"), Contract::end());
    EXPECT_EQ(parse_contract("A!x"), parse_contract("A!x . end"));
    EXPECT_EQ(render(parse_contract("rec t . A!x . t")), "rec t . A!x . t");
}

TEST(Frontend, ContractDiagnostics)
{
    for (std::string bad : {"a!x.end + a?y.end", "A!x (+) A!x", "A?x + A?x", "A?x + B?y", "rec t . t", "A!", "A!x ."}) {
        auto ds = diagnostics_of([&] { parse_contract(bad); });
        ASSERT_FALSE(ds.empty()) << bad;
        for (const auto& d : ds) EXPECT_TRUE(span_inside(d.span, bad)) << bad;
    }
    auto ds = diagnostics_of([] { parse_contract("A!x .\n  B?"); });
    ASSERT_FALSE(ds.empty());
    EXPECT_EQ(ds.front().span.line, 2);
    EXPECT_EQ(format_diagnostic(ds.front(), "f.ctr").substr(0, 7), "f.ctr:2");
}

TEST(Frontend, NamedContracts)
{
    auto cs = parse_named_contracts("# store\nA: B!x;\nB: A?x\n");
    EXPECT_EQ(cs.size(), 2u);
    EXPECT_FALSE(diagnostics_of([] { parse_named_contracts("A: B!x\nA: B!y"); }).empty());
}

TEST(Frontend, GlobalTypes)
{
    const std::string text = "B12 -> A : req ; B12 -> A : req ; A -> B12 : quote ; B12 -> A : order ; A -> B12 : ok";
    GlobalType g = parse_global(text);
    EXPECT_EQ(render(g), text);
    EXPECT_EQ(parse_global("end"), GlobalType::end());
    EXPECT_EQ(render(GlobalType::end()), "end");
    EXPECT_EQ(global_from_json(nlohmann::json::parse(to_json(g).dump())), g);
    GlobalType p = parse_global("rec x . (A -> B : a ; x \\/ A -> B : b) || C -> D : c");
    EXPECT_EQ(parse_global(render(p)), p);
    EXPECT_EQ(global_from_json(nlohmann::json::parse(to_json(p).dump())), p);
    EXPECT_FALSE(diagnostics_of([] { parse_global("A -> A : x"); }).empty());
    EXPECT_FALSE(diagnostics_of([] { parse_global("A -> B x"); }).empty());
}

TEST(Frontend, SystemSyntax)
{
    Co2System s = parse_system(R"(
policy { min=2, smallest }
def X(u; a) = do u a!x . X(u; a)
participant A { (x) tell A @x { B!x } . fuse(min=2, terminating) . X(x; B) }
participant B { (y; b) (tell A @y { b?x } . do y b?x + tau . 0 | tau) }
)");
    EXPECT_EQ(s.order, AgreementOrder::SmallestFirst);
    ASSERT_EQ(s.processes.at("A").size(), 1u);
    EXPECT_EQ(s.processes.at("A").front().kind(), Process::Kind::Delim);
    EXPECT_EQ(s.definitions.at("X").part_params, std::vector<std::string>{"a"});
    EXPECT_EQ(parse_system(render_system(s)), s);
}

TEST(Frontend, SessionNamesResolve)
{
    Co2System s = parse_system("participant A { do s B!int . (s) tell A @s { B!x } . do s B!x }\n"
                               "participant B { do s A?int }\nsession s { A: B!int; B: A?int; }");
    const Process& a = s.processes.at("A").front();
    EXPECT_TRUE(a.branches().front().prefix.session.is_name());
    const Process& inner = a.branches().front().cont.body();
    EXPECT_FALSE(inner.branches().front().cont.branches().front().prefix.session.is_name());
}

TEST(Frontend, SystemDiagnostics)
{
    expect_system_error("participant A {0} participant A {0}", "duplicate participant");
    expect_system_error("participant A { X(; ) }", "unknown definition");
    expect_system_error("def X(u;) = 0\nparticipant A { X(;) }", "arity");
    expect_system_error("participant A { do x B!int }", "session variable x");
    expect_system_error("participant A { tell A @x { B!int } . do x b!int }", "participant variable b");
    expect_system_error("participant A { fuse(smallest) }", "unknown fuse option");
    expect_system_error("participant A { tau . }", "expected a process");
    expect_system_error("session s { A: b!x; }", "participant variables");
    expect_system_error("participant A { tell A @x { B!x } + 0 }", "prefixed");
}

TEST(Frontend, FixturesParseAndRoundTrip)
{
    int n = 0;
    for (const auto& e : std::filesystem::directory_iterator(CO2_FIXTURES)) {
        std::string text = slurp(e.path());
        auto ext = e.path().extension();
        if (ext == ".co2") {
            Co2System s = parse_system(text);
            EXPECT_EQ(parse_system(render_system(s)), s) << e.path();
            Co2System ns = normalize(s);
            EXPECT_EQ(normalize(parse_system(render_system(ns))), ns) << e.path();
        } else if (ext == ".ctr") {
            for (const auto& [p, c] : parse_named_contracts(text)) EXPECT_EQ(parse_contract(render(c)), c);
        } else if (ext == ".gt") {
            GlobalType g = parse_global(text);
            EXPECT_EQ(parse_global(render(g)), g);
        } else {
            continue;
        }
        ++n;
    }
    EXPECT_GE(n, 10);
}

TEST(Frontend, TraceLines)
{
    Co2System s = normalize(parse_system(slurp(std::filesystem::path(CO2_FIXTURES) / "s1.co2")));
    Trace t = run(s, {3});
    std::stringstream buf;
    write_trace(buf, t.steps);
    auto back = read_trace(buf);
    ASSERT_EQ(back.size(), t.steps.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_TRUE(same_step(back[i].label, t.steps[i].label)) << i;
        EXPECT_EQ(back[i].digest, t.steps[i].digest);
        EXPECT_EQ(to_json(back[i]), to_json(t.steps[i]));
    }
    EXPECT_NO_THROW(replay(s, back));

    std::stringstream empty;
    write_trace(empty, {});
    EXPECT_EQ(empty.str(), "");
    EXPECT_TRUE(read_trace(empty).empty());

    std::stringstream bad("{\"step\":0}\n");
    EXPECT_THROW(read_trace(bad), Error);
    std::stringstream junk("not json\n");
    EXPECT_THROW(read_trace(junk), Error);
}

TEST(FrontendProperty, GeneratedTermsRoundTrip)
{
    gen::Generator g(99);
    for (int i = 0; i < 400; ++i) {
        Contract c = g.contract("A", {"B", "C"});
        ASSERT_EQ(parse_contract(render(c)), c) << render(c);
        GlobalType t = canonicalize(g.global(g.names(3), 4));
        ASSERT_EQ(parse_global(render(t)), t) << render(t);
        Co2System s = g.system();
        std::string text = render_system(s);
        Co2System back;
        ASSERT_NO_THROW(back = parse_system(text)) << text;
        ASSERT_EQ(back, s) << text << "\n--\n" << render_system(back);
    }
}
