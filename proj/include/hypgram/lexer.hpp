#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "hypgram/errors.hpp"

namespace hypgram {

/// One lexical token shared by the hypothesis parser, grammar files, and the
/// grammar-vs-sentence matcher.
struct Token {
    enum class Kind { Ident, Number, String, Punct, Ellipsis, End };
    Kind kind = Kind::End;
    std::string text;   // identifier / punct text, or string contents (no quotes)
    double num = 0.0;   // valid when kind == Number
    char quote = '\0';  // original quote character for String tokens
    Span span;

    bool same(const Token& o) const {
        if (kind == Kind::Number && o.kind == Kind::Number) return num == o.num;
        // Bare identifiers and quoted strings are interchangeable
        // ("Title" vs Title), so they compare by content.
        auto wordy = [](Kind k) { return k == Kind::Ident || k == Kind::String; };
        if (wordy(kind) && wordy(o.kind)) return text == o.text;
        return kind == o.kind && text == o.text;
    }
};

inline std::string num_to_string(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string token_text(const Token& t) {
    switch (t.kind) {
        case Token::Kind::Number: return num_to_string(t.num);
        case Token::Kind::String: return "'" + t.text + "'";
        case Token::Kind::Ellipsis: return "...";
        case Token::Kind::End: return "<end>";
        default: return t.text;
    }
}

/// Renders a token sequence back to parseable text with minimal spacing.
inline std::string render_tokens(const std::vector<Token>& toks) {
    std::string out;
    auto no_space_before = [](const Token& t) {
        return t.kind == Token::Kind::Punct &&
               (t.text == ")" || t.text == "]" || t.text == "}" || t.text == "," ||
                t.text == "(" || t.text == "." );
    };
    auto no_space_after = [](const Token& t) {
        return t.kind == Token::Kind::Punct &&
               (t.text == "(" || t.text == "[" || t.text == "{" || t.text == "!" ||
                t.text == ".");
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (!out.empty() && !no_space_before(toks[i]) &&
            !(i > 0 && no_space_after(toks[i - 1])))
            out += ' ';
        out += token_text(toks[i]);
    }
    return out;
}

/// Tokenizes hypothesis text or a grammar-rule body. `#` starts a comment.
/// Identifiers may contain interior hyphens when followed by a letter
/// (Gate-name, Car-id); a hyphen before a digit or space lexes as punctuation,
/// so infix subtraction between bare identifiers needs spaces.
inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    auto at = [&](std::size_t k) -> char { return k < n ? src[k] : '\0'; };
    auto push = [&](Token::Kind k, std::string text, std::size_t b, std::size_t e,
                    double num = 0.0) -> Token& {
        Token t;
        t.kind = k;
        t.text = std::move(text);
        t.num = num;
        t.span = Span{b, e};
        out.push_back(std::move(t));
        return out.back();
    };
    while (i < n) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (c == '#') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        std::size_t start = i;
        unsigned char uc = static_cast<unsigned char>(c);
        if (uc == 0xE2 && i + 2 < n) {
            unsigned char b1 = static_cast<unsigned char>(src[i + 1]);
            unsigned char b2 = static_cast<unsigned char>(src[i + 2]);
            i += 3;
            if (b1 == 0x88 && b2 == 0x88) { push(Token::Kind::Ident, "in", start, i); continue; }
            if (b1 == 0x88 && b2 == 0x89) {
                push(Token::Kind::Ident, "not", start, i);
                push(Token::Kind::Ident, "in", start, i);
                continue;
            }
            if (b1 == 0x89 && b2 == 0xA0) { push(Token::Kind::Punct, "!=", start, i); continue; }
            if (b1 == 0x89 && b2 == 0xA4) { push(Token::Kind::Punct, "<=", start, i); continue; }
            if (b1 == 0x89 && b2 == 0xA5) { push(Token::Kind::Punct, ">=", start, i); continue; }
            throw ParseError("unrecognized unicode symbol", Span{start, i});
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            ++i;
            while (std::isdigit(static_cast<unsigned char>(at(i)))) ++i;
            if (at(i) == '.' && std::isdigit(static_cast<unsigned char>(at(i + 1)))) {
                ++i;
                while (std::isdigit(static_cast<unsigned char>(at(i)))) ++i;
            }
            if ((at(i) == 'e' || at(i) == 'E') &&
                (std::isdigit(static_cast<unsigned char>(at(i + 1))) ||
                 ((at(i + 1) == '+' || at(i + 1) == '-') &&
                  std::isdigit(static_cast<unsigned char>(at(i + 2)))))) {
                i += 2;
                while (std::isdigit(static_cast<unsigned char>(at(i)))) ++i;
            }
            std::string text(src.substr(start, i - start));
            push(Token::Kind::Number, text, start, i, std::strtod(text.c_str(), nullptr));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            ++i;
            while (true) {
                char d = at(i);
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') { ++i; continue; }
                if (d == '-' && (std::isalpha(static_cast<unsigned char>(at(i + 1))) ||
                                 at(i + 1) == '_')) {
                    i += 2;
                    continue;
                }
                break;
            }
            push(Token::Kind::Ident, std::string(src.substr(start, i - start)), start, i);
            continue;
        }
        if (c == '\'' || c == '"') {
            char q = c;
            ++i;
            std::size_t body = i;
            while (i < n && src[i] != q) ++i;
            if (i >= n) throw ParseError("unterminated string literal", Span{start, n});
            push(Token::Kind::String, std::string(src.substr(body, i - body)), start, i + 1)
                .quote = q;
            ++i;
            continue;
        }
        auto two = src.substr(i, 2);
        if (two == ":-" || two == "<=" || two == ">=" || two == "!=") {
            push(Token::Kind::Punct, std::string(two), start, i + 2);
            i += 2;
            continue;
        }
        if (src.substr(i, 3) == "...") {
            push(Token::Kind::Ellipsis, "...", start, i + 3);
            i += 3;
            continue;
        }
        static const std::string singles = "()[]{},&!.~=<>+-*/|?";
        if (singles.find(c) != std::string::npos) {
            push(Token::Kind::Punct, std::string(1, c), start, i + 1);
            ++i;
            continue;
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", Span{start, i + 1});
    }
    Token end;
    end.kind = Token::Kind::End;
    end.span = Span{n, n};
    out.push_back(std::move(end));
    return out;
}

}  // namespace hypgram
