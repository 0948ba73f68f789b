#pragma once

// Root decomposition of a query tree and the nine-clause view of a leaf
// SELECT consumed by sub-clause frequency scoring.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "sqlcal/sql/ast.hpp"
#include "sqlcal/sql/canonical.hpp"

namespace sqlcal::sql {

enum class ClauseKind : std::size_t {
    Distinct,
    Select,
    From,
    On,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Limit,
};

inline constexpr std::size_t kClauseCount = 9;

inline constexpr std::array<ClauseKind, kClauseCount> kAllClauses = {
    ClauseKind::Distinct, ClauseKind::Select, ClauseKind::From,    ClauseKind::On,    ClauseKind::Where,
    ClauseKind::GroupBy,  ClauseKind::Having, ClauseKind::OrderBy, ClauseKind::Limit,
};

inline std::string_view to_string(ClauseKind c) {
    static constexpr std::array<std::string_view, kClauseCount> names = {
        "DISTINCT", "SELECT", "FROM", "ON", "WHERE", "GROUP BY", "HAVING", "ORDER BY", "LIMIT",
    };
    return names[static_cast<std::size_t>(c)];
}

/// One entry per clause kind; std::nullopt is the NONE tag.
class ClauseMap {
public:
    using Entry = std::optional<std::string>;

    const Entry& operator[](ClauseKind c) const { return entries_[static_cast<std::size_t>(c)]; }
    Entry& operator[](ClauseKind c) { return entries_[static_cast<std::size_t>(c)]; }
    const std::array<Entry, kClauseCount>& entries() const { return entries_; }

    friend bool operator==(const ClauseMap&, const ClauseMap&) = default;

private:
    std::array<Entry, kClauseCount> entries_{};
};

inline ClauseMap extract_clauses(const SelectStatement& s) {
    ClauseMap m;
    if (s.distinct) m[ClauseKind::Distinct] = "distinct";
    m[ClauseKind::Select] = select_list_sql(s);
    m[ClauseKind::From] = from_sql(s.from);
    const auto ons = s.on_conditions();
    if (!ons.empty()) {
        std::string joined;
        for (std::size_t i = 0; i < ons.size(); ++i) {
            if (i) joined += " | ";
            joined += to_sql(*ons[i]);
        }
        m[ClauseKind::On] = std::move(joined);
    }
    if (s.where) m[ClauseKind::Where] = to_sql(*s.where);
    if (!s.group_by.empty()) m[ClauseKind::GroupBy] = expr_list_sql(s.group_by);
    if (s.having) m[ClauseKind::Having] = to_sql(*s.having);
    if (!s.order_by.empty()) m[ClauseKind::OrderBy] = order_by_sql(s.order_by);
    if (s.limit) m[ClauseKind::Limit] = limit_sql(*s.limit);
    return m;
}

/// Set operation at the root plus its two sub-queries. A plain SELECT
/// decomposes into (NONE, itself, NONE).
struct Decomposition {
    std::optional<SetOp> set_op;
    QueryBox subq1;
    QueryBox subq2;
};

inline Decomposition decompose(const QueryBox& tree) {
    if (tree->is_leaf()) return {std::nullopt, tree, QueryBox{}};
    const auto& node = tree->set_op();
    return {node.op, node.left, node.right};
}

inline Decomposition decompose(const QueryTree& tree) { return decompose(QueryBox(tree)); }

}  // namespace sqlcal::sql
