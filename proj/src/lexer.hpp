#pragma once

#include "co2/syntax.hpp"

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace co2::detail {

enum class Tok {
    Ident,
    Number,
    Bang,
    Query,
    Dot,
    OPlus,
    Plus,
    LParen,
    RParen,
    Arrow,
    Colon,
    Semi,
    Wedge,  // "\/"
    DoubleBar,
    Bar,
    At,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Equals,
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    Span span;
};

std::vector<Token> tokenize(std::string_view text);

const char* describe(Tok t);

inline bool is_upper_ident(const Token& t) { return t.kind == Tok::Ident && std::isupper(static_cast<unsigned char>(t.text[0])); }
inline bool is_lower_ident(const Token& t) { return t.kind == Tok::Ident && !is_upper_ident(t); }

class Cursor {
public:
    explicit Cursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    const Token& peek(std::size_t ahead = 0) const
    {
        std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    bool at(Tok t, std::size_t ahead = 0) const { return peek(ahead).kind == t; }
    bool at_word(std::string_view w, std::size_t ahead = 0) const
    {
        return peek(ahead).kind == Tok::Ident && peek(ahead).text == w;
    }
    const Token& next() { return pos_ < tokens_.size() - 1 ? tokens_[pos_++] : tokens_.back(); }
    bool accept(Tok t)
    {
        if (!at(t)) return false;
        next();
        return true;
    }
    const Token& expect(Tok t, std::string_view what);
    const Token& expect_word(std::string_view w);

    [[noreturn]] void fail(const std::string& message, const Span& span) const;
    [[noreturn]] void fail(const std::string& message) const { fail(message, peek().span); }

    std::size_t position() const { return pos_; }
    void rewind(std::size_t pos) { pos_ = pos; }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

Span join(const Span& a, const Span& b);

// Shared grammar pieces, used by both the contract and the system parser.
Contract parse_contract_expr(Cursor& in);
void check_contract(const Contract& c, const Span& span, Cursor& in);

}  // namespace co2::detail
