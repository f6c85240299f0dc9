#include "co2/syntax.hpp"

#include "lexer.hpp"

#include <set>

namespace co2 {

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : Error(diagnostics.empty() ? std::string("parse error") : format_diagnostic(diagnostics.front())),
      diagnostics_(std::move(diagnostics))
{
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file)
{
    std::string out;
    if (!file.empty()) out += std::string(file) + ":";
    out += std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": ";
    out += d.severity == Diagnostic::Severity::Error ? "error: " : "warning: ";
    return out + d.message;
}

namespace detail {

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto ident_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    };
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.span.line = line;
        t.span.col = col;
        std::size_t len = 1;
        auto starts = [&](std::string_view s) { return text.substr(i, s.size()) == s; };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Tok::Ident;
            while (i + len < text.size() && ident_char(text[i + len])) ++len;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            t.kind = Tok::Number;
            while (i + len < text.size() && std::isdigit(static_cast<unsigned char>(text[i + len]))) ++len;
        } else if (starts("(+)")) {
            t.kind = Tok::OPlus;
            len = 3;
        } else if (starts("->")) {
            t.kind = Tok::Arrow;
            len = 2;
        } else if (starts("\\/")) {
            t.kind = Tok::Wedge;
            len = 2;
        } else if (starts("||")) {
            t.kind = Tok::DoubleBar;
            len = 2;
        } else {
            switch (c) {
            case '!': t.kind = Tok::Bang; break;
            case '?': t.kind = Tok::Query; break;
            case '.': t.kind = Tok::Dot; break;
            case '+': t.kind = Tok::Plus; break;
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case ':': t.kind = Tok::Colon; break;
            case ';': t.kind = Tok::Semi; break;
            case '|': t.kind = Tok::Bar; break;
            case '@': t.kind = Tok::At; break;
            case '{': t.kind = Tok::LBrace; break;
            case '}': t.kind = Tok::RBrace; break;
            case '[': t.kind = Tok::LBracket; break;
            case ']': t.kind = Tok::RBracket; break;
            case ',': t.kind = Tok::Comma; break;
            case '=': t.kind = Tok::Equals; break;
            default: {
                Diagnostic d;
                d.message = std::string("unexpected character '") + c + "'";
                d.span = {line, col, line, col + 1};
                throw ParseError({d});
            }
            }
        }
        t.text = std::string(text.substr(i, len));
        advance(len);
        t.span.end_line = line;
        t.span.end_col = col;
        out.push_back(std::move(t));
    }
    Token eof;
    eof.kind = Tok::Eof;
    eof.span = {line, col, line, col};
    out.push_back(eof);
    return out;
}

const char* describe(Tok t)
{
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Bang: return "'!'";
    case Tok::Query: return "'?'";
    case Tok::Dot: return "'.'";
    case Tok::OPlus: return "'(+)'";
    case Tok::Plus: return "'+'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Arrow: return "'->'";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Wedge: return "'\\/'";
    case Tok::DoubleBar: return "'||'";
    case Tok::Bar: return "'|'";
    case Tok::At: return "'@'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Equals: return "'='";
    case Tok::Eof: return "end of input";
    }
    return "token";
}

const Token& Cursor::expect(Tok t, std::string_view what)
{
    if (!at(t)) {
        const Token& got = peek();
        fail("expected " + std::string(what) + ", found " +
             (got.kind == Tok::Eof ? std::string("end of input") : "'" + got.text + "'"));
    }
    return next();
}

const Token& Cursor::expect_word(std::string_view w)
{
    if (!at_word(w)) fail("expected '" + std::string(w) + "'");
    return next();
}

void Cursor::fail(const std::string& message, const Span& span) const
{
    Diagnostic d;
    d.message = message;
    d.span = span;
    throw ParseError({d});
}

Span join(const Span& a, const Span& b) { return {a.line, a.col, b.end_line, b.end_col}; }

namespace {

Contract parse_unit(Cursor& in);

PartRef part_of(const Token& t) { return is_upper_ident(t) ? PartRef::name(t.text) : PartRef::var(t.text); }

Contract parse_branch(Cursor& in)
{
    const Token& who = in.expect(Tok::Ident, "participant");
    PartRef part = part_of(who);
    bool send = in.at(Tok::Bang);
    if (!in.accept(Tok::Bang) && !in.accept(Tok::Query)) in.fail("expected '!' or '?'");
    const Token& sort = in.expect(Tok::Ident, "sort");
    Contract cont;
    if (in.accept(Tok::Dot)) cont = parse_unit(in);
    if (send) return Contract::send({{part, Sort{sort.text}, cont}});
    return Contract::recv(part, {{Sort{sort.text}, cont}});
}

bool at_branch(const Cursor& in) { return in.at(Tok::Ident) && (in.at(Tok::Bang, 1) || in.at(Tok::Query, 1)); }

Contract parse_unit(Cursor& in)
{
    if (at_branch(in)) return parse_branch(in);
    if (in.at_word("end")) {
        in.next();
        return Contract::end();
    }
    if (in.at_word("rec")) {
        in.next();
        const Token& var = in.expect(Tok::Ident, "recursion variable");
        if (!is_lower_ident(var)) in.fail("recursion variables must start with a lower-case letter", var.span);
        in.expect(Tok::Dot, "'.'");
        return Contract::rec(var.text, parse_contract_expr(in));
    }
    if (in.accept(Tok::LParen)) {
        Contract c = parse_contract_expr(in);
        in.expect(Tok::RParen, "')'");
        return c;
    }
    if (in.at(Tok::Ident)) {
        const Token& t = in.peek();
        if (is_upper_ident(t)) in.fail("expected '!' or '?' after participant " + t.text);
        in.next();
        return Contract::var(t.text);
    }
    in.fail("expected a contract");
}

}  // namespace

Contract parse_contract_expr(Cursor& in)
{
    Span start = in.peek().span;
    Contract first = at_branch(in) ? parse_branch(in) : parse_unit(in);
    if (!in.at(Tok::OPlus) && !in.at(Tok::Plus)) return first;

    Tok op = in.peek().kind;
    std::vector<Contract> terms{first};
    Span last = start;
    while (in.at(Tok::OPlus) || in.at(Tok::Plus)) {
        if (in.peek().kind != op) in.fail("'(+)' and '+' cannot be mixed without parentheses");
        in.next();
        terms.push_back(at_branch(in) ? parse_branch(in) : parse_unit(in));
        last = in.peek().span;
    }
    Span span = join(start, last);
    try {
        if (op == Tok::OPlus) {
            std::vector<SendBranch> branches;
            for (const auto& t : terms) {
                if (t.kind() != Contract::Kind::Send) in.fail("'(+)' joins send branches only", span);
                branches.insert(branches.end(), t.send_branches().begin(), t.send_branches().end());
            }
            return Contract::send(std::move(branches));
        }
        std::vector<RecvBranch> branches;
        for (const auto& t : terms) {
            if (t.kind() != Contract::Kind::Recv) in.fail("'+' joins receive branches only", span);
            if (t.recv_from() != terms.front().recv_from())
                in.fail("all branches of an external choice must receive from the same participant", span);
            branches.insert(branches.end(), t.recv_branches().begin(), t.recv_branches().end());
        }
        return Contract::recv(terms.front().recv_from(), std::move(branches));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        in.fail(e.what(), span);
    }
}

void check_contract(const Contract& c, const Span& span, Cursor& in)
{
    for (const auto& v : free_rec_vars(c)) in.fail("unbound recursion variable " + v, span);
    if (!is_guarded(c)) in.fail("unguarded recursion", span);
}

}  // namespace detail

using namespace detail;

Contract parse_contract(std::string_view text)
{
    Cursor in(tokenize(text));
    Span start = in.peek().span;
    Contract c = parse_contract_expr(in);
    Span end = in.peek().span;
    in.expect(Tok::Eof, "end of contract");
    check_contract(c, join(start, end), in);
    return c;
}

std::map<std::string, Contract> parse_named_contracts(std::string_view text)
{
    Cursor in(tokenize(text));
    std::map<std::string, Contract> out;
    while (!in.at(Tok::Eof)) {
        const Token& name = in.expect(Tok::Ident, "participant name");
        if (!is_upper_ident(name)) in.fail("participant names must start with an upper-case letter", name.span);
        if (out.count(name.text)) in.fail("duplicate participant " + name.text, name.span);
        in.expect(Tok::Colon, "':'");
        Span start = in.peek().span;
        Contract c = parse_contract_expr(in);
        check_contract(c, join(start, in.peek().span), in);
        out.emplace(name.text, c);
        in.accept(Tok::Semi);
    }
    return out;
}

namespace {

std::string render_top(const Contract& c);

std::string render_cont(const Contract& c)
{
    bool multi = (c.kind() == Contract::Kind::Send && c.send_branches().size() > 1) ||
                 (c.kind() == Contract::Kind::Recv && c.recv_branches().size() > 1);
    if (multi || c.kind() == Contract::Kind::Rec) return "(" + render_top(c) + ")";
    return render_top(c);
}

std::string render_top(const Contract& c)
{
    switch (c.kind()) {
    case Contract::Kind::End:
        return "end";
    case Contract::Kind::Var:
        return c.var_name();
    case Contract::Kind::Rec:
        return "rec " + c.rec_var() + " . " + render_top(c.rec_body());
    case Contract::Kind::Send: {
        std::string out;
        for (const auto& br : c.send_branches()) {
            if (!out.empty()) out += " (+) ";
            out += br.to.id + "!" + br.sort.name;
            if (!br.cont.is_end()) out += " . " + render_cont(br.cont);
        }
        return out;
    }
    case Contract::Kind::Recv: {
        std::string out;
        for (const auto& br : c.recv_branches()) {
            if (!out.empty()) out += " + ";
            out += c.recv_from().id + "?" + br.sort.name;
            if (!br.cont.is_end()) out += " . " + render_cont(br.cont);
        }
        return out;
    }
    }
    return "end";
}

GlobalType parse_global_expr(Cursor& in);

GlobalType parse_seq(Cursor& in)
{
    if (is_upper_ident(in.peek()) && in.at(Tok::Arrow, 1)) {
        const Token& from = in.next();
        in.next();
        const Token& to = in.expect(Tok::Ident, "participant name");
        if (!is_upper_ident(to)) in.fail("participant names must start with an upper-case letter", to.span);
        in.expect(Tok::Colon, "':'");
        const Token& sort = in.expect(Tok::Ident, "sort");
        Span span = join(from.span, sort.span);
        GlobalType cont;
        if (in.accept(Tok::Semi)) cont = parse_seq(in);
        if (from.text == to.text) in.fail("sender and receiver must differ", span);
        return GlobalType::msg(from.text, to.text, Sort{sort.text}, cont);
    }
    if (in.at_word("end")) {
        in.next();
        return GlobalType::end();
    }
    if (in.at_word("rec")) {
        in.next();
        const Token& var = in.expect(Tok::Ident, "recursion variable");
        if (!is_lower_ident(var)) in.fail("recursion variables must start with a lower-case letter", var.span);
        in.expect(Tok::Dot, "'.'");
        return GlobalType::rec(var.text, parse_global_expr(in));
    }
    if (in.accept(Tok::LParen)) {
        GlobalType g = parse_global_expr(in);
        in.expect(Tok::RParen, "')'");
        return g;
    }
    if (is_lower_ident(in.peek())) return GlobalType::var(in.next().text);
    in.fail("expected a global type");
}

GlobalType parse_choice(Cursor& in)
{
    std::vector<GlobalType> alts{parse_seq(in)};
    while (in.accept(Tok::Wedge)) alts.push_back(parse_seq(in));
    return alts.size() == 1 ? alts.front() : GlobalType::choice(std::move(alts));
}

GlobalType parse_global_expr(Cursor& in)
{
    std::vector<GlobalType> threads{parse_choice(in)};
    while (in.accept(Tok::DoubleBar)) threads.push_back(parse_choice(in));
    return threads.size() == 1 ? threads.front() : GlobalType::par(std::move(threads));
}

std::string render_g(const GlobalType& g);

std::string wrap_if(const GlobalType& g, std::initializer_list<GlobalType::Kind> kinds)
{
    for (auto k : kinds)
        if (g.kind() == k) return "(" + render_g(g) + ")";
    return render_g(g);
}

std::string render_g(const GlobalType& g)
{
    using K = GlobalType::Kind;
    switch (g.kind()) {
    case K::End:
        return "end";
    case K::Var:
        return g.var_name();
    case K::Rec:
        return "rec " + g.rec_var() + " . " + render_g(g.rec_body());
    case K::Msg: {
        std::string out = g.from() + " -> " + g.to() + " : " + g.sort().name;
        if (g.cont().kind() != K::End) out += " ; " + wrap_if(g.cont(), {K::Choice, K::Par, K::Rec});
        return out;
    }
    case K::Choice: {
        std::string out;
        for (const auto& a : g.children()) {
            if (!out.empty()) out += " \\/ ";
            out += wrap_if(a, {K::Choice, K::Par, K::Rec});
        }
        return out;
    }
    case K::Par: {
        std::string out;
        for (const auto& t : g.children()) {
            if (!out.empty()) out += " || ";
            out += wrap_if(t, {K::Par, K::Rec});
        }
        return out;
    }
    }
    return "end";
}

}  // namespace

std::string render(const Contract& c) { return render_top(c); }

GlobalType parse_global(std::string_view text)
{
    Cursor in(tokenize(text));
    GlobalType g = parse_global_expr(in);
    in.expect(Tok::Eof, "end of global type");
    return g;
}

std::string render(const GlobalType& g) { return render_g(g); }

nlohmann::ordered_json to_json(const GlobalType& g)
{
    using K = GlobalType::Kind;
    nlohmann::ordered_json j;
    switch (g.kind()) {
    case K::End:
        j["kind"] = "end";
        break;
    case K::Var:
        j["kind"] = "var";
        j["name"] = g.var_name();
        break;
    case K::Rec:
        j["kind"] = "rec";
        j["var"] = g.rec_var();
        j["body"] = to_json(g.rec_body());
        break;
    case K::Msg:
        j["kind"] = "msg";
        j["from"] = g.from();
        j["to"] = g.to();
        j["sort"] = g.sort().name;
        j["cont"] = to_json(g.cont());
        break;
    case K::Choice:
    case K::Par: {
        j["kind"] = g.kind() == K::Choice ? "choice" : "par";
        auto& arr = j[g.kind() == K::Choice ? "alternatives" : "threads"];
        arr = nlohmann::ordered_json::array();
        for (const auto& c : g.children()) arr.push_back(to_json(c));
        break;
    }
    }
    return j;
}

GlobalType global_from_json(const nlohmann::json& j)
{
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "end") return GlobalType::end();
        if (kind == "var") return GlobalType::var(j.at("name").get<std::string>());
        if (kind == "rec") return GlobalType::rec(j.at("var").get<std::string>(), global_from_json(j.at("body")));
        if (kind == "msg")
            return GlobalType::msg(j.at("from").get<std::string>(), j.at("to").get<std::string>(),
                                   Sort{j.at("sort").get<std::string>()}, global_from_json(j.at("cont")));
        if (kind == "choice" || kind == "par") {
            std::vector<GlobalType> children;
            for (const auto& c : j.at(kind == "choice" ? "alternatives" : "threads")) children.push_back(global_from_json(c));
            return kind == "choice" ? GlobalType::choice(std::move(children)) : GlobalType::par(std::move(children));
        }
        throw Error("unknown global type kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed global type JSON: ") + e.what());
    }
}

std::string render(const Interaction& i) { return "(" + i.peer + "," + i.sort.name + ")"; }

std::string render(const ReadySet& s)
{
    std::string out = "{";
    for (const auto& i : s) {
        if (out.size() > 1) out += ", ";
        out += render(i);
    }
    return out + "}";
}

std::string render(const ContractSystem& t)
{
    std::string out;
    for (const auto& [p, c] : t.contracts) {
        if (!out.empty()) out += " | ";
        out += p + "[" + render(c) + "]";
    }
    for (const auto& [ch, q] : t.queues) {
        if (q.empty()) continue;
        out += " | " + ch.first + "->" + ch.second + ":[";
        for (std::size_t i = 0; i < q.size(); ++i) out += (i ? "," : "") + q[i].name;
        out += "]";
    }
    return out.empty() ? "0" : out;
}

}  // namespace co2
