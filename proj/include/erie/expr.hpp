#pragma once

#include <memory>
#include <string>
#include <vector>

#include "erie/data_table.hpp"
#include "erie/value.hpp"

namespace erie {

// Expression trees for filter/calculate/condition tests. The surface syntax
// follows the datum.<field> convention, e.g. "(datum.count>80)" or
// "(datum.residual + 2.477468)/(2.495122 + 2.477468)".
struct Expr {
    enum class Op {
        Literal,
        Field,      // datum.name / datum["name"]
        Neg, Not,
        Add, Sub, Mul, Div,
        Eq, Ne, Lt, Le, Gt, Ge,
        And, Or,
    };

    Op op = Op::Literal;
    Value literal;
    std::string field;
    std::unique_ptr<Expr> lhs;
    std::unique_ptr<Expr> rhs;

    static std::unique_ptr<Expr> make_literal(Value v);
    static std::unique_ptr<Expr> make_field(std::string name);
    static std::unique_ptr<Expr> make_unary(Op op, std::unique_ptr<Expr> a);
    static std::unique_ptr<Expr> make_binary(Op op, std::unique_ptr<Expr> a,
                                             std::unique_ptr<Expr> b);
};

using ExprPtr = std::unique_ptr<Expr>;

ExprPtr parse_expr(const std::string& text);  // throws Error(Parse)

// A row view for evaluation: column name -> value lookup.
class Datum {
  public:
    Datum(const DataTable& table, std::size_t row) : table_(&table), row_(row) {}
    const Value& get(const std::string& field) const;

  private:
    const DataTable* table_;
    std::size_t row_;
};

Value eval_expr(const Expr& e, const Datum& datum);  // throws Error(Eval)

// Serializes back to source form (used by tests and spec round-tripping).
std::string expr_to_string(const Expr& e);

}  // namespace erie
