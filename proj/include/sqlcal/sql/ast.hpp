#pragma once

// Parsed SQL: a binary tree of set operations over leaf SELECT statements.
// Trees are immutable once built; subtrees are shared through Box.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sqlcal::sql {

/// Immutable shared owner with deep equality.
template <class T>
class Box {
public:
    Box() = default;
    explicit Box(T value) : ptr_(std::make_shared<const T>(std::move(value))) {}

    const T& operator*() const { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }
    explicit operator bool() const { return ptr_ != nullptr; }
    const std::shared_ptr<const T>& shared() const { return ptr_; }

    friend bool operator==(const Box& a, const Box& b) {
        if (a.ptr_ == b.ptr_) return true;
        if (!a.ptr_ || !b.ptr_) return false;
        return *a.ptr_ == *b.ptr_;
    }

private:
    std::shared_ptr<const T> ptr_;
};

struct QueryTree;
using QueryBox = Box<QueryTree>;

enum class SetOp { Union, UnionAll, Intersect, Except };

inline std::string_view to_string(SetOp op) {
    switch (op) {
        case SetOp::Union: return "union";
        case SetOp::UnionAll: return "union all";
        case SetOp::Intersect: return "intersect";
        case SetOp::Except: return "except";
    }
    return "?";
}

enum class ExprKind {
    Literal,   // text: number / 'string' / "string" / null
    Column,    // text: dotted, lowercased name
    Star,      // text: * or qualifier.*
    Unary,     // text: not | - | + ; args[0]
    Binary,    // text: operator ; args[0], args[1]
    Function,  // text: name ; args ; distinct
    Case,      // args: [operand] (when then)* [else]
    Cast,      // text: type ; args[0]
    In,        // args[0] in (args[1..]) or subquery
    Between,   // args[0] between args[1] and args[2]
    Like,      // args[0] like args[1]
    IsNull,    // args[0] is [not] null
    Exists,    // subquery
    Subquery,  // ( subquery )
};

struct Expr {
    ExprKind kind = ExprKind::Literal;
    std::string text;
    bool negated = false;      // NOT IN / NOT BETWEEN / NOT LIKE / IS NOT NULL
    bool distinct = false;     // aggregate(DISTINCT ...)
    bool has_operand = false;  // CASE x WHEN ...
    bool has_else = false;
    std::vector<Expr> args;
    QueryBox subquery;

    friend bool operator==(const Expr&, const Expr&) = default;
};

inline Expr make_expr(ExprKind kind, std::string text = {}) {
    Expr e;
    e.kind = kind;
    e.text = std::move(text);
    return e;
}

struct SelectItem {
    Expr expr;
    std::optional<std::string> alias;
    friend bool operator==(const SelectItem&, const SelectItem&) = default;
};

struct TableRef {
    std::string name;  // empty when subquery is set
    QueryBox subquery;
    std::optional<std::string> alias;
    friend bool operator==(const TableRef&, const TableRef&) = default;
};

struct Join {
    std::string op;  // "," or a lowercased join keyword sequence such as "left outer join"
    TableRef table;
    std::optional<Expr> on;
    friend bool operator==(const Join&, const Join&) = default;
};

struct FromClause {
    TableRef first;
    std::vector<Join> joins;
    friend bool operator==(const FromClause&, const FromClause&) = default;
};

struct OrderItem {
    Expr expr;
    std::string direction;  // "", "asc" or "desc"
    friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct Limit {
    Expr count;
    std::optional<Expr> offset;
    bool comma_form = false;  // LIMIT offset, count
    friend bool operator==(const Limit&, const Limit&) = default;
};

struct SelectStatement {
    bool distinct = false;
    std::vector<SelectItem> select_list;
    FromClause from;
    std::optional<Expr> where;
    std::vector<Expr> group_by;
    std::optional<Expr> having;
    std::vector<OrderItem> order_by;
    std::optional<Limit> limit;

    /// Join conditions in source order.
    std::vector<const Expr*> on_conditions() const {
        std::vector<const Expr*> out;
        for (const auto& j : from.joins)
            if (j.on) out.push_back(&*j.on);
        return out;
    }

    friend bool operator==(const SelectStatement&, const SelectStatement&) = default;
};

struct SetOpNode {
    SetOp op;
    QueryBox left;
    QueryBox right;
    friend bool operator==(const SetOpNode&, const SetOpNode&) = default;
};

struct QueryTree {
    std::variant<SelectStatement, SetOpNode> node;

    bool is_leaf() const { return std::holds_alternative<SelectStatement>(node); }
    const SelectStatement& select() const { return std::get<SelectStatement>(node); }
    const SetOpNode& set_op() const { return std::get<SetOpNode>(node); }

    friend bool operator==(const QueryTree&, const QueryTree&) = default;
};

inline QueryTree make_leaf(SelectStatement s) { return QueryTree{std::move(s)}; }

inline QueryTree make_node(SetOp op, QueryTree left, QueryTree right) {
    return QueryTree{SetOpNode{op, QueryBox(std::move(left)), QueryBox(std::move(right))}};
}

}  // namespace sqlcal::sql
