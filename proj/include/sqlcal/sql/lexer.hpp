#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sqlcal/errors.hpp"

namespace sqlcal::sql {

enum class TokenKind {
    Word,          // bare identifier or keyword
    QuotedIdent,   // `name` or [name]
    String,        // 'text'
    DoubleQuoted,  // "text"
    Number,
    Symbol,
    End,
};

struct Token {
    TokenKind kind;
    std::string text;  // raw source bytes, quotes included for quoted kinds
    std::size_t offset;
};

namespace detail {

inline bool is_word_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
inline bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

inline std::string describe(const Token& t) {
    if (t.kind == TokenKind::End) return "end of input";
    return "'" + t.text + "'";
}

}  // namespace detail

/// Splits SQL text into tokens. Comments (-- and /* */) and whitespace are
/// dropped; quoted tokens keep their delimiters so they re-emit byte-exact.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(src[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && src[i + 1] == '-') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const auto end = src.find("*/", i + 2);
            if (end == std::string_view::npos) throw ParseError(i, "end of comment", "end of input");
            i = end + 2;
            continue;
        }
        const std::size_t start = i;
        if (detail::is_word_start(c)) {
            while (i < n && detail::is_word_char(static_cast<unsigned char>(src[i]))) ++i;
            out.push_back({TokenKind::Word, std::string(src.substr(start, i - start)), start});
            continue;
        }
        if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            if (i < n && src[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            if (i < n && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) {
                    i = j;
                    while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                }
            }
            if (i < n && detail::is_word_start(static_cast<unsigned char>(src[i])))
                throw ParseError(i, "end of number", "'" + std::string(1, src[i]) + "'");
            out.push_back({TokenKind::Number, std::string(src.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'' || c == '"' || c == '`') {
            // Doubled delimiter is an escaped delimiter.
            ++i;
            for (;;) {
                if (i >= n) throw ParseError(start, "closing quote", "end of input");
                if (src[i] == static_cast<char>(c)) {
                    if (i + 1 < n && src[i + 1] == static_cast<char>(c)) {
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                ++i;
            }
            const auto kind = c == '\'' ? TokenKind::String : c == '"' ? TokenKind::DoubleQuoted : TokenKind::QuotedIdent;
            out.push_back({kind, std::string(src.substr(start, i - start)), start});
            continue;
        }
        if (c == '[') {
            const auto end = src.find(']', i);
            if (end == std::string_view::npos) throw ParseError(start, "']'", "end of input");
            i = end + 1;
            out.push_back({TokenKind::QuotedIdent, std::string(src.substr(start, i - start)), start});
            continue;
        }
        static constexpr std::string_view two_char[] = {"<=", ">=", "<>", "!=", "==", "||"};
        bool matched = false;
        for (auto op : two_char) {
            if (src.substr(i, 2) == op) {
                out.push_back({TokenKind::Symbol, std::string(op), start});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        static constexpr std::string_view single = "(),.;*+-/%=<>";
        if (single.find(static_cast<char>(c)) != std::string_view::npos) {
            out.push_back({TokenKind::Symbol, std::string(1, static_cast<char>(c)), start});
            ++i;
            continue;
        }
        throw ParseError(start, "a token", "'" + std::string(1, static_cast<char>(c)) + "'");
    }
    out.push_back({TokenKind::End, "", n});
    return out;
}

}  // namespace sqlcal::sql
