#pragma once

// Deterministic serialization of parsed SQL. Keywords and identifiers are
// lowercase (the parser already lowered them), literals are kept verbatim,
// every token is separated by exactly one space and parentheses appear only
// where precedence requires them.

#include <cctype>
#include <string>
#include <string_view>

#include "sqlcal/sql/ast.hpp"

namespace sqlcal::sql {

inline std::string canonicalize(const QueryTree& tree);

namespace detail {

class TokenWriter {
public:
    TokenWriter& operator<<(std::string_view token) {
        if (token.empty()) return *this;
        if (!out_.empty()) out_ += ' ';
        out_ += token;
        return *this;
    }
    std::string str() && { return std::move(out_); }
    const std::string& str() const& { return out_; }

private:
    std::string out_;
};

enum Precedence : int {
    kOr = 1,
    kAnd = 2,
    kNot = 3,
    kCompare = 4,
    kAdditive = 5,
    kMultiplicative = 6,
    kSign = 7,
    kAtom = 8,
};

inline int precedence(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Binary:
            if (e.text == "or") return kOr;
            if (e.text == "and") return kAnd;
            if (e.text == "+" || e.text == "-" || e.text == "||") return kAdditive;
            if (e.text == "*" || e.text == "/" || e.text == "%") return kMultiplicative;
            return kCompare;
        case ExprKind::Unary: return e.text == "not" ? kNot : kSign;
        case ExprKind::In:
        case ExprKind::Between:
        case ExprKind::Like:
        case ExprKind::IsNull: return kCompare;
        default: return kAtom;
    }
}

inline bool is_unsigned_number(const Expr& e) {
    return e.kind == ExprKind::Literal && !e.text.empty() &&
           (std::isdigit(static_cast<unsigned char>(e.text[0])) || e.text[0] == '.');
}

void write_expr(TokenWriter& w, const Expr& e);

inline void write_operand(TokenWriter& w, const Expr& e, bool wrap) {
    if (wrap) {
        w << "(";
        write_expr(w, e);
        w << ")";
    } else {
        write_expr(w, e);
    }
}

inline void write_subquery(TokenWriter& w, const QueryBox& q) {
    w << "(" << canonicalize(*q) << ")";
}

inline void write_list(TokenWriter& w, const std::vector<Expr>& items, std::size_t from = 0) {
    for (std::size_t i = from; i < items.size(); ++i) {
        if (i > from) w << ",";
        write_expr(w, items[i]);
    }
}

inline void write_expr(TokenWriter& w, const Expr& e) {
    const int p = precedence(e);
    switch (e.kind) {
        case ExprKind::Literal:
        case ExprKind::Column:
        case ExprKind::Star: w << e.text; break;
        case ExprKind::Unary:
            if (e.text == "-" && is_unsigned_number(e.args[0])) {
                w << "-" + e.args[0].text;
                break;
            }
            w << e.text;
            write_operand(w, e.args[0], precedence(e.args[0]) < p);
            break;
        case ExprKind::Binary:
            write_operand(w, e.args[0], precedence(e.args[0]) < p);
            w << e.text;
            write_operand(w, e.args[1], precedence(e.args[1]) <= p);
            break;
        case ExprKind::Function:
            w << e.text << "(";
            if (e.distinct) w << "distinct";
            write_list(w, e.args);
            w << ")";
            break;
        case ExprKind::Case: {
            w << "case";
            std::size_t i = 0;
            if (e.has_operand) write_expr(w, e.args[i++]);
            const std::size_t end = e.args.size() - (e.has_else ? 1 : 0);
            for (; i + 1 < end; i += 2) {
                w << "when";
                write_expr(w, e.args[i]);
                w << "then";
                write_expr(w, e.args[i + 1]);
            }
            if (e.has_else) {
                w << "else";
                write_expr(w, e.args.back());
            }
            w << "end";
            break;
        }
        case ExprKind::Cast:
            w << "cast" << "(";
            write_expr(w, e.args[0]);
            w << "as" << e.text << ")";
            break;
        case ExprKind::In:
            write_operand(w, e.args[0], precedence(e.args[0]) < p);
            if (e.negated) w << "not";
            w << "in";
            if (e.subquery) {
                write_subquery(w, e.subquery);
            } else {
                w << "(";
                write_list(w, e.args, 1);
                w << ")";
            }
            break;
        case ExprKind::Between:
            write_operand(w, e.args[0], precedence(e.args[0]) < p);
            if (e.negated) w << "not";
            w << "between";
            write_operand(w, e.args[1], precedence(e.args[1]) <= p);
            w << "and";
            write_operand(w, e.args[2], precedence(e.args[2]) <= p);
            break;
        case ExprKind::Like:
            write_operand(w, e.args[0], precedence(e.args[0]) < p);
            if (e.negated) w << "not";
            w << "like";
            write_operand(w, e.args[1], precedence(e.args[1]) <= p);
            break;
        case ExprKind::IsNull:
            write_operand(w, e.args[0], precedence(e.args[0]) < p);
            w << "is";
            if (e.negated) w << "not";
            w << "null";
            break;
        case ExprKind::Exists:
            w << "exists";
            write_subquery(w, e.subquery);
            break;
        case ExprKind::Subquery: write_subquery(w, e.subquery); break;
    }
}

inline void write_table_ref(TokenWriter& w, const TableRef& t) {
    if (t.subquery) write_subquery(w, t.subquery);
    else w << t.name;
    if (t.alias) w << "as" << *t.alias;
}

}  // namespace detail

inline std::string to_sql(const Expr& e) {
    detail::TokenWriter w;
    detail::write_expr(w, e);
    return std::move(w).str();
}

/// SELECT list without the keyword, e.g. "x , count ( * ) as n".
inline std::string select_list_sql(const SelectStatement& s) {
    detail::TokenWriter w;
    for (std::size_t i = 0; i < s.select_list.size(); ++i) {
        if (i) w << ",";
        detail::write_expr(w, s.select_list[i].expr);
        if (s.select_list[i].alias) w << "as" << *s.select_list[i].alias;
    }
    return std::move(w).str();
}

/// FROM clause without the keyword and without ON conditions.
inline std::string from_sql(const FromClause& f, bool with_on = false) {
    detail::TokenWriter w;
    detail::write_table_ref(w, f.first);
    for (const auto& j : f.joins) {
        w << j.op;
        detail::write_table_ref(w, j.table);
        if (with_on && j.on) {
            w << "on";
            detail::write_expr(w, *j.on);
        }
    }
    return std::move(w).str();
}

inline std::string expr_list_sql(const std::vector<Expr>& items) {
    detail::TokenWriter w;
    detail::write_list(w, items);
    return std::move(w).str();
}

inline std::string order_by_sql(const std::vector<OrderItem>& items) {
    detail::TokenWriter w;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) w << ",";
        detail::write_expr(w, items[i].expr);
        w << items[i].direction;
    }
    return std::move(w).str();
}

inline std::string limit_sql(const Limit& l) {
    detail::TokenWriter w;
    detail::write_expr(w, l.count);
    if (l.offset) {
        w << (l.comma_form ? "," : "offset");
        detail::write_expr(w, *l.offset);
    }
    return std::move(w).str();
}

inline std::string to_sql(const SelectStatement& s) {
    detail::TokenWriter w;
    w << "select";
    if (s.distinct) w << "distinct";
    w << select_list_sql(s) << "from" << from_sql(s.from, true);
    if (s.where) w << "where" << to_sql(*s.where);
    if (!s.group_by.empty()) w << "group by" << expr_list_sql(s.group_by);
    if (s.having) w << "having" << to_sql(*s.having);
    if (!s.order_by.empty()) w << "order by" << order_by_sql(s.order_by);
    if (s.limit) w << "limit" << limit_sql(*s.limit);
    return std::move(w).str();
}

inline std::string canonicalize(const QueryTree& tree) {
    if (tree.is_leaf()) return to_sql(tree.select());
    const auto& node = tree.set_op();
    detail::TokenWriter w;
    // Set operations chain left-associatively, so only a compound right
    // operand needs parentheses.
    w << canonicalize(*node.left) << to_string(node.op);
    if (node.right->is_leaf()) w << canonicalize(*node.right);
    else w << "(" << canonicalize(*node.right) << ")";
    return std::move(w).str();
}

}  // namespace sqlcal::sql
