#pragma once

// Recursive-descent parser for the SELECT subset used by text-to-SQL
// benchmarks. Anything outside the subset raises ParseError; the pipeline
// uses that signal to drop syntactically invalid candidates.
//
// Expression precedence, loosest first:
//   OR < AND < NOT < comparison/IN/BETWEEN/LIKE/IS < + - || < * / % < unary -/+

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "sqlcal/errors.hpp"
#include "sqlcal/sql/ast.hpp"
#include "sqlcal/sql/lexer.hpp"

namespace sqlcal::sql {

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline constexpr std::array<std::string_view, 42> kReserved = {
    "select", "from",    "where", "group", "by",       "having", "order",  "limit",  "offset", "union", "all",
    "intersect", "except", "join", "inner", "left",    "right",  "full",   "outer",  "cross",  "on",    "as",
    "and",    "or",      "not",   "in",    "exists",   "between", "like",  "is",     "null",   "distinct",
    "asc",    "desc",    "case",  "when",  "then",     "else",   "end",    "cast",   "natural", "using",
};

inline bool is_reserved(std::string_view lowered) {
    return std::find(kReserved.begin(), kReserved.end(), lowered) != kReserved.end();
}

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    QueryTree parse_statement() {
        auto tree = parse_query();
        if (peek_symbol(";")) advance();
        if (peek().kind != TokenKind::End) fail("end of statement");
        return tree;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
    }
    const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& expected) const {
        throw ParseError(peek().offset, expected, describe(peek()));
    }

    bool peek_keyword(std::string_view kw, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == TokenKind::Word && lower(t.text) == kw;
    }
    bool peek_symbol(std::string_view s, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == TokenKind::Symbol && t.text == s;
    }
    bool accept_keyword(std::string_view kw) {
        if (!peek_keyword(kw)) return false;
        advance();
        return true;
    }
    bool accept_symbol(std::string_view s) {
        if (!peek_symbol(s)) return false;
        advance();
        return true;
    }
    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) fail("'" + std::string(kw) + "'");
    }
    void expect_symbol(std::string_view s) {
        if (!accept_symbol(s)) fail("'" + std::string(s) + "'");
    }

    bool starts_query(std::size_t ahead = 0) const {
        std::size_t k = ahead;
        while (peek_symbol("(", k)) ++k;
        return peek_keyword("select", k);
    }

    // --- queries -----------------------------------------------------------

    QueryTree parse_query() {
        QueryTree left = parse_query_operand();
        for (;;) {
            SetOp op;
            if (accept_keyword("union")) {
                op = accept_keyword("all") ? SetOp::UnionAll : SetOp::Union;
            } else if (accept_keyword("intersect")) {
                op = SetOp::Intersect;
            } else if (accept_keyword("except")) {
                op = SetOp::Except;
            } else {
                return left;
            }
            QueryTree right = parse_query_operand();
            left = make_node(op, std::move(left), std::move(right));
        }
    }

    QueryTree parse_query_operand() {
        if (accept_symbol("(")) {
            auto inner = parse_query();
            expect_symbol(")");
            return inner;
        }
        return make_leaf(parse_select());
    }

    SelectStatement parse_select() {
        if (!peek_keyword("select")) fail("'select'");
        advance();
        SelectStatement s;
        if (accept_keyword("distinct")) s.distinct = true;
        else accept_keyword("all");
        do {
            s.select_list.push_back(parse_select_item());
        } while (accept_symbol(","));
        expect_keyword("from");
        s.from = parse_from();
        if (accept_keyword("where")) s.where = parse_expr();
        if (accept_keyword("group")) {
            expect_keyword("by");
            do {
                s.group_by.push_back(parse_expr());
            } while (accept_symbol(","));
        }
        if (accept_keyword("having")) s.having = parse_expr();
        if (accept_keyword("order")) {
            expect_keyword("by");
            do {
                OrderItem item{parse_expr(), ""};
                if (accept_keyword("asc")) item.direction = "asc";
                else if (accept_keyword("desc")) item.direction = "desc";
                s.order_by.push_back(std::move(item));
            } while (accept_symbol(","));
        }
        if (accept_keyword("limit")) {
            Limit lim{parse_additive(), std::nullopt, false};
            if (accept_symbol(",")) {
                lim.offset = parse_additive();
                lim.comma_form = true;
            } else if (accept_keyword("offset")) {
                lim.offset = parse_additive();
            }
            s.limit = std::move(lim);
        }
        return s;
    }

    std::optional<std::string> parse_alias() {
        if (accept_keyword("as")) return parse_identifier("alias");
        const auto& t = peek();
        if ((t.kind == TokenKind::Word && !is_reserved(lower(t.text))) || t.kind == TokenKind::QuotedIdent)
            return parse_identifier("alias");
        return std::nullopt;
    }

    SelectItem parse_select_item() {
        if (peek_symbol("*")) {
            advance();
            return {make_expr(ExprKind::Star, "*"), std::nullopt};
        }
        SelectItem item{parse_expr(), std::nullopt};
        item.alias = parse_alias();
        return item;
    }

    TableRef parse_table_ref() {
        TableRef ref;
        if (peek_symbol("(")) {
            if (!starts_query(1)) fail("subquery");
            advance();
            ref.subquery = QueryBox(parse_query());
            expect_symbol(")");
        } else {
            ref.name = parse_dotted_name("table name");
        }
        ref.alias = parse_alias();
        return ref;
    }

    std::optional<std::string> parse_join_op() {
        std::string op;
        auto take = [&](std::string_view kw) {
            if (!accept_keyword(kw)) return false;
            op += op.empty() ? std::string(kw) : " " + std::string(kw);
            return true;
        };
        if (take("inner") || take("cross")) {
            expect_keyword("join");
            return op + " join";
        }
        if (take("left") || take("right") || take("full")) {
            take("outer");
            expect_keyword("join");
            return op + " join";
        }
        if (take("join")) return op;
        if (peek_keyword("natural")) fail("join (natural joins are unsupported)");
        return std::nullopt;
    }

    FromClause parse_from() {
        FromClause from{parse_table_ref(), {}};
        for (;;) {
            if (accept_symbol(",")) {
                from.joins.push_back({",", parse_table_ref(), std::nullopt});
                continue;
            }
            auto op = parse_join_op();
            if (!op) return from;
            Join j{*op, parse_table_ref(), std::nullopt};
            if (accept_keyword("on")) j.on = parse_expr();
            else if (peek_keyword("using")) fail("'on' (using is unsupported)");
            from.joins.push_back(std::move(j));
        }
    }

    // --- identifiers -------------------------------------------------------

    std::string parse_identifier(const char* what) {
        const auto& t = peek();
        if (t.kind == TokenKind::Word) {
            auto l = lower(t.text);
            if (is_reserved(l)) fail(what);
            advance();
            return l;
        }
        if (t.kind == TokenKind::QuotedIdent) {
            advance();
            return lower(t.text);
        }
        fail(what);
    }

    std::string parse_dotted_name(const char* what) {
        std::string name = parse_identifier(what);
        while (peek_symbol(".") && !peek_symbol("*", 1)) {
            advance();
            name += "." + parse_identifier("identifier");
        }
        return name;
    }

    // --- expressions -------------------------------------------------------

    Expr parse_expr() { return parse_or(); }

    static Expr binary(std::string op, Expr l, Expr r) {
        Expr e = make_expr(ExprKind::Binary, std::move(op));
        e.args.push_back(std::move(l));
        e.args.push_back(std::move(r));
        return e;
    }

    Expr parse_or() {
        Expr left = parse_and();
        while (accept_keyword("or")) left = binary("or", std::move(left), parse_and());
        return left;
    }

    Expr parse_and() {
        Expr left = parse_not();
        while (accept_keyword("and")) left = binary("and", std::move(left), parse_not());
        return left;
    }

    Expr parse_not() {
        if (accept_keyword("not")) {
            Expr e = make_expr(ExprKind::Unary, "not");
            e.args.push_back(parse_not());
            return e;
        }
        return parse_comparison();
    }

    Expr parse_comparison() {
        Expr left = parse_additive();
        for (;;) {
            const auto& t = peek();
            if (t.kind == TokenKind::Symbol &&
                (t.text == "=" || t.text == "==" || t.text == "<>" || t.text == "!=" || t.text == "<" ||
                 t.text == "<=" || t.text == ">" || t.text == ">=")) {
                std::string op = t.text == "==" ? "=" : t.text == "!=" ? "<>" : t.text;
                advance();
                left = binary(std::move(op), std::move(left), parse_additive());
                continue;
            }
            bool negated = false;
            if (peek_keyword("not") &&
                (peek_keyword("in", 1) || peek_keyword("between", 1) || peek_keyword("like", 1))) {
                advance();
                negated = true;
            }
            if (accept_keyword("in")) {
                left = parse_in_tail(std::move(left), negated);
            } else if (accept_keyword("between")) {
                Expr e = make_expr(ExprKind::Between);
                e.negated = negated;
                e.args.push_back(std::move(left));
                e.args.push_back(parse_additive());
                expect_keyword("and");
                e.args.push_back(parse_additive());
                left = std::move(e);
            } else if (accept_keyword("like")) {
                Expr e = make_expr(ExprKind::Like, "like");
                e.negated = negated;
                e.args.push_back(std::move(left));
                e.args.push_back(parse_additive());
                left = std::move(e);
            } else if (accept_keyword("is")) {
                Expr e = make_expr(ExprKind::IsNull);
                e.negated = accept_keyword("not");
                expect_keyword("null");
                e.args.push_back(std::move(left));
                left = std::move(e);
            } else {
                return left;
            }
        }
    }

    Expr parse_in_tail(Expr left, bool negated) {
        Expr e = make_expr(ExprKind::In);
        e.negated = negated;
        e.args.push_back(std::move(left));
        expect_symbol("(");
        if (starts_query()) {
            e.subquery = QueryBox(parse_query());
        } else {
            do {
                e.args.push_back(parse_expr());
            } while (accept_symbol(","));
        }
        expect_symbol(")");
        return e;
    }

    Expr parse_additive() {
        Expr left = parse_multiplicative();
        for (;;) {
            if (peek_symbol("+") || peek_symbol("-") || peek_symbol("||")) {
                std::string op = advance().text;
                left = binary(std::move(op), std::move(left), parse_multiplicative());
            } else {
                return left;
            }
        }
    }

    Expr parse_multiplicative() {
        Expr left = parse_unary();
        for (;;) {
            if (peek_symbol("*") || peek_symbol("/") || peek_symbol("%")) {
                std::string op = advance().text;
                left = binary(std::move(op), std::move(left), parse_unary());
            } else {
                return left;
            }
        }
    }

    Expr parse_unary() {
        if (peek_symbol("-") || peek_symbol("+")) {
            std::string op = advance().text;
            Expr operand = parse_unary();
            // A sign directly on an unsigned numeric literal folds into it.
            if (op == "-" && operand.kind == ExprKind::Literal && !operand.text.empty() &&
                (std::isdigit(static_cast<unsigned char>(operand.text[0])) || operand.text[0] == '.')) {
                operand.text = "-" + operand.text;
                return operand;
            }
            Expr e = make_expr(ExprKind::Unary, std::move(op));
            e.args.push_back(std::move(operand));
            return e;
        }
        return parse_primary();
    }

    Expr parse_case() {
        Expr e = make_expr(ExprKind::Case);
        if (!peek_keyword("when")) {
            e.has_operand = true;
            e.args.push_back(parse_expr());
        }
        if (!peek_keyword("when")) fail("'when'");
        while (accept_keyword("when")) {
            e.args.push_back(parse_expr());
            expect_keyword("then");
            e.args.push_back(parse_expr());
        }
        if (accept_keyword("else")) {
            e.has_else = true;
            e.args.push_back(parse_expr());
        }
        expect_keyword("end");
        return e;
    }

    Expr parse_cast() {
        expect_symbol("(");
        Expr e = make_expr(ExprKind::Cast);
        e.args.push_back(parse_expr());
        expect_keyword("as");
        std::string type = parse_identifier("type name");
        if (accept_symbol("(")) {
            type += " (";
            do {
                if (peek().kind != TokenKind::Number) fail("type length");
                type += " " + advance().text;
                if (peek_symbol(",")) type += " ,";
            } while (accept_symbol(","));
            expect_symbol(")");
            type += " )";
        }
        e.text = std::move(type);
        expect_symbol(")");
        return e;
    }

    Expr parse_function_call(std::string name) {
        expect_symbol("(");
        Expr e = make_expr(ExprKind::Function, std::move(name));
        if (accept_symbol(")")) return e;
        if (accept_keyword("distinct")) e.distinct = true;
        if (peek_symbol("*") && peek_symbol(")", 1)) {
            advance();
            e.args.push_back(make_expr(ExprKind::Star, "*"));
        } else {
            do {
                e.args.push_back(parse_expr());
            } while (accept_symbol(","));
        }
        expect_symbol(")");
        return e;
    }

    Expr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Number: return make_expr(ExprKind::Literal, advance().text);
            case TokenKind::String:
            case TokenKind::DoubleQuoted: return make_expr(ExprKind::Literal, advance().text);
            case TokenKind::Symbol:
                if (t.text == "(") {
                    if (starts_query(1)) {
                        advance();
                        Expr e = make_expr(ExprKind::Subquery);
                        e.subquery = QueryBox(parse_query());
                        expect_symbol(")");
                        return e;
                    }
                    advance();
                    Expr inner = parse_expr();
                    if (peek_symbol(",")) fail("')' (row values are unsupported)");
                    expect_symbol(")");
                    return inner;
                }
                fail("expression");
            case TokenKind::QuotedIdent: return parse_column_tail(lower(advance().text));
            case TokenKind::Word: {
                const auto word = lower(t.text);
                if (word == "null") {
                    advance();
                    return make_expr(ExprKind::Literal, "null");
                }
                if (word == "case") {
                    advance();
                    return parse_case();
                }
                if (word == "cast" && peek_symbol("(", 1)) {
                    advance();
                    return parse_cast();
                }
                if (word == "exists") {
                    advance();
                    expect_symbol("(");
                    if (!starts_query()) fail("subquery");
                    Expr e = make_expr(ExprKind::Exists);
                    e.subquery = QueryBox(parse_query());
                    expect_symbol(")");
                    return e;
                }
                if (is_reserved(word)) fail("expression");
                advance();
                if (peek_symbol("(")) return parse_function_call(word);
                return parse_column_tail(word);
            }
            case TokenKind::End: fail("expression");
        }
        fail("expression");
    }

    Expr parse_column_tail(std::string name) {
        while (peek_symbol(".")) {
            advance();
            if (accept_symbol("*")) return make_expr(ExprKind::Star, name + ".*");
            name += "." + parse_identifier("identifier");
        }
        return make_expr(ExprKind::Column, std::move(name));
    }
};

}  // namespace detail

/// Parses one SQL statement. A trailing semicolon is accepted and dropped.
inline QueryTree parse_sql(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError(0, "'select'", "end of input");
    return detail::Parser(text).parse_statement();
}

}  // namespace sqlcal::sql
