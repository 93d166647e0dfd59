#pragma once

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "opdim/error.hpp"
#include "opdim/formula.hpp"
#include "opdim/signature.hpp"

namespace opdim {

// Grammar (whitespace-insensitive):
//   formula := quant | iff
//   quant   := ("forall" | "exists") var "." formula
//   iff     := impl ["<->" impl]
//   impl    := disj ["->" impl]
//   disj    := conj {"|" conj}
//   conj    := lit {"&" lit}
//   lit     := "~" lit | "(" formula ")" | quant | "true" | "false" | atom
//   atom    := name "(" term {"," term} ")" | term ("<"suffix | "=") term
// A "<" immediately followed by a suffix names relation "<suffix" when the
// signature has it; otherwise it is relation "<" and the suffix starts the
// next term. Terms are variables, signature constants or rational literals.

namespace detail {

enum class Tok {
    ident,
    number,
    lparen,
    rparen,
    comma,
    dot,
    amp,
    bar,
    tilde,
    arrow,
    double_arrow,
    equals,
    less,
    end,
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
inline bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

inline std::vector<Token> lex(std::string_view s, const Signature& sig) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto push = [&](Tok k, std::string text, std::size_t len) {
        out.push_back({k, std::move(text), line, col});
        advance(len);
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            push(Tok::ident, std::string(s.substr(i, j - i)), j - i);
            continue;
        }
        if (digit(c) || (c == '-' && i + 1 < s.size() && digit(s[i + 1]))) {
            std::size_t j = i + 1;
            while (j < s.size() && digit(s[j])) ++j;
            if (j + 1 < s.size() && s[j] == '/' && digit(s[j + 1])) {
                ++j;
                while (j < s.size() && digit(s[j])) ++j;
            }
            push(Tok::number, std::string(s.substr(i, j - i)), j - i);
            continue;
        }
        if (s.substr(i, 3) == "<->") {
            push(Tok::double_arrow, "<->", 3);
            continue;
        }
        if (s.substr(i, 2) == "->") {
            push(Tok::arrow, "->", 2);
            continue;
        }
        if (c == '<') {
            std::size_t j = i + 1;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            // Longest suffix naming a relation of the signature wins.
            std::size_t len = 1;
            for (std::size_t k = j; k > i + 1; --k) {
                if (sig.find_relation(std::string(s.substr(i, k - i)))) {
                    len = k - i;
                    break;
                }
            }
            push(Tok::less, std::string(s.substr(i, len)), len);
            continue;
        }
        switch (c) {
        case '(': push(Tok::lparen, "(", 1); continue;
        case ')': push(Tok::rparen, ")", 1); continue;
        case ',': push(Tok::comma, ",", 1); continue;
        case '.': push(Tok::dot, ".", 1); continue;
        case '&': push(Tok::amp, "&", 1); continue;
        case '|': push(Tok::bar, "|", 1); continue;
        case '~': push(Tok::tilde, "~", 1); continue;
        case '=': push(Tok::equals, "=", 1); continue;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", line, col, out.size() + 1);
        }
    }
    out.push_back({Tok::end, "<end of input>", line, col});
    return out;
}

class Parser {
public:
    Parser(std::string_view text, const Signature& sig, const std::vector<std::string>* declared)
        : sig_(sig), declared_(declared), toks_(lex(text, sig)) {}

    Formula parse() {
        Formula f = formula();
        if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "' after formula");
        return f;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        throw ParseError(msg, t.line, t.column, pos_ + 1);
    }
    void expect(Tok k, const char* what) {
        if (!accept(k)) fail(std::string("expected ") + what + ", found '" + peek().text + "'");
    }

    bool at_quantifier() const {
        return peek().kind == Tok::ident && (peek().text == "forall" || peek().text == "exists");
    }

    Formula formula() {
        if (at_quantifier()) return quant();
        Formula a = implication();
        if (accept(Tok::double_arrow)) return iff(a, implication());
        return a;
    }

    Formula quant() {
        bool universal = next().text == "forall";
        if (peek().kind != Tok::ident || is_keyword(peek().text)) fail("expected a variable after quantifier");
        std::string v = peek().text;
        if (sig_.has_constant(v)) fail("cannot quantify over constant '" + v + "'");
        ++pos_;
        expect(Tok::dot, "'.'");
        bound_.push_back(v);
        Formula body = formula();
        bound_.pop_back();
        return universal ? forall(v, body) : exists(v, body);
    }

    Formula implication() {
        Formula a = disjunction();
        if (accept(Tok::arrow)) return implies(a, implication());
        return a;
    }

    Formula disjunction() {
        std::vector<Formula> kids{conjunction()};
        while (accept(Tok::bar)) kids.push_back(conjunction());
        return disj(std::move(kids));
    }

    Formula conjunction() {
        std::vector<Formula> kids{literal()};
        while (accept(Tok::amp)) kids.push_back(literal());
        return conj(std::move(kids));
    }

    Formula literal() {
        if (accept(Tok::tilde)) return negate(literal());
        if (at_quantifier()) return quant();
        if (peek().kind == Tok::ident && peek().text == "true") {
            ++pos_;
            return top();
        }
        if (peek().kind == Tok::ident && peek().text == "false") {
            ++pos_;
            return bottom();
        }
        if (accept(Tok::lparen)) {
            Formula f = formula();
            expect(Tok::rparen, "')'");
            return f;
        }
        return atomic();
    }

    Formula atomic() {
        if (peek().kind == Tok::ident && toks_[pos_ + 1].kind == Tok::lparen) {
            std::string name = peek().text;
            const RelationSymbol* rel = sig_.find_relation(name);
            if (!rel) fail("unknown relation '" + name + "'");
            pos_ += 2;
            std::vector<Term> args{term()};
            while (accept(Tok::comma)) args.push_back(term());
            if (args.size() != rel->arity) {
                --pos_;
                fail("relation '" + name + "' has arity " + std::to_string(rel->arity) + " but got " +
                     std::to_string(args.size()) + " arguments");
            }
            expect(Tok::rparen, "')'");
            return atom(name, std::move(args));
        }
        Term lhs = term();
        if (peek().kind == Tok::equals) {
            ++pos_;
            return equal(std::move(lhs), term());
        }
        if (peek().kind == Tok::less) {
            std::string name = peek().text;
            const RelationSymbol* rel = sig_.find_relation(name);
            if (!rel) fail("unknown relation '" + name + "'");
            if (rel->arity != 2) fail("infix relation '" + name + "' must be binary");
            ++pos_;
            return atom(name, {std::move(lhs), term()});
        }
        fail("expected '=' or an order relation, found '" + peek().text + "'");
    }

    static bool is_keyword(const std::string& s) {
        return s == "forall" || s == "exists" || s == "true" || s == "false";
    }

    Term term() {
        const Token& t = peek();
        if (t.kind == Tok::number) {
            if (!sig_.numerals) fail("numeric literal '" + t.text + "' is not allowed in this signature");
            ++pos_;
            return Term::number(parse_rational(t.text));
        }
        if (t.kind != Tok::ident || is_keyword(t.text)) fail("expected a term, found '" + t.text + "'");
        std::string name = t.text;
        if (sig_.has_constant(name)) {
            ++pos_;
            return Term::constant(name);
        }
        bool is_bound = std::find(bound_.begin(), bound_.end(), name) != bound_.end();
        if (declared_ && !is_bound && std::find(declared_->begin(), declared_->end(), name) == declared_->end())
            fail("unknown constant '" + name + "'");
        ++pos_;
        return Term::var(name);
    }

    const Signature& sig_;
    const std::vector<std::string>* declared_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<std::string> bound_;
};

} // namespace detail

/// Parses the formula DSL against `sig`. Identifiers that are not constants
/// are variables.
inline Formula parse_formula(std::string_view text, const Signature& sig) {
    return detail::Parser(text, sig, nullptr).parse();
}

/// As above, but every free identifier must be one of `declared`; any other
/// name is reported as an unknown constant.
inline Formula parse_formula(std::string_view text, const Signature& sig, const std::vector<std::string>& declared) {
    return detail::Parser(text, sig, &declared).parse();
}

} // namespace opdim
