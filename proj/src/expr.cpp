#include "erie/expr.hpp"

#include <cctype>
#include <cstdlib>

#include "erie/error.hpp"

namespace erie {

std::unique_ptr<Expr> Expr::make_literal(Value v) {
    auto e = std::make_unique<Expr>();
    e->op = Op::Literal;
    e->literal = std::move(v);
    return e;
}

std::unique_ptr<Expr> Expr::make_field(std::string name) {
    auto e = std::make_unique<Expr>();
    e->op = Op::Field;
    e->field = std::move(name);
    return e;
}

std::unique_ptr<Expr> Expr::make_unary(Op op, std::unique_ptr<Expr> a) {
    auto e = std::make_unique<Expr>();
    e->op = op;
    e->lhs = std::move(a);
    return e;
}

std::unique_ptr<Expr> Expr::make_binary(Op op, std::unique_ptr<Expr> a,
                                        std::unique_ptr<Expr> b) {
    auto e = std::make_unique<Expr>();
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

namespace {

struct Parser {
    const std::string& src;
    std::size_t pos = 0;

    explicit Parser(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& msg) {
        throw Error(Error::Kind::Parse,
                    "expression error at offset " + std::to_string(pos) + ": " + msg +
                        " in \"" + src + "\"");
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eat(const char* tok) {
        skip_ws();
        std::size_t n = std::char_traits<char>::length(tok);
        if (src.compare(pos, n, tok) == 0) {
            pos += n;
            return true;
        }
        return false;
    }

    bool peek_word(const char* word) {
        skip_ws();
        std::size_t n = std::char_traits<char>::length(word);
        if (src.compare(pos, n, word) != 0) return false;
        std::size_t after = pos + n;
        if (after < src.size() &&
            (std::isalnum(static_cast<unsigned char>(src[after])) || src[after] == '_'))
            return false;
        return true;
    }

    bool eat_word(const char* word) {
        if (!peek_word(word)) return false;
        pos += std::char_traits<char>::length(word);
        return true;
    }

    std::string parse_ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected identifier");
        return src.substr(start, pos - start);
    }

    ExprPtr parse_or() {
        auto left = parse_and();
        for (;;) {
            if (eat("||") || eat_word("or"))
                left = Expr::make_binary(Expr::Op::Or, std::move(left), parse_and());
            else
                return left;
        }
    }

    ExprPtr parse_and() {
        auto left = parse_not();
        for (;;) {
            if (eat("&&") || eat_word("and"))
                left = Expr::make_binary(Expr::Op::And, std::move(left), parse_not());
            else
                return left;
        }
    }

    ExprPtr parse_not() {
        skip_ws();
        if (eat_word("not"))
            return Expr::make_unary(Expr::Op::Not, parse_not());
        if (pos < src.size() && src[pos] == '!' &&
            (pos + 1 >= src.size() || src[pos + 1] != '=')) {
            ++pos;
            return Expr::make_unary(Expr::Op::Not, parse_not());
        }
        return parse_cmp();
    }

    ExprPtr parse_cmp() {
        auto left = parse_add();
        skip_ws();
        Expr::Op op;
        if (eat("==") || eat("="))
            op = Expr::Op::Eq;
        else if (eat("!="))
            op = Expr::Op::Ne;
        else if (eat(">="))
            op = Expr::Op::Ge;
        else if (eat("<="))
            op = Expr::Op::Le;
        else if (eat(">"))
            op = Expr::Op::Gt;
        else if (eat("<"))
            op = Expr::Op::Lt;
        else
            return left;
        return Expr::make_binary(op, std::move(left), parse_add());
    }

    ExprPtr parse_add() {
        auto left = parse_mul();
        for (;;) {
            skip_ws();
            if (eat("+"))
                left = Expr::make_binary(Expr::Op::Add, std::move(left), parse_mul());
            else if (eat("-"))
                left = Expr::make_binary(Expr::Op::Sub, std::move(left), parse_mul());
            else
                return left;
        }
    }

    ExprPtr parse_mul() {
        auto left = parse_unary();
        for (;;) {
            skip_ws();
            if (eat("*"))
                left = Expr::make_binary(Expr::Op::Mul, std::move(left), parse_unary());
            else if (eat("/"))
                left = Expr::make_binary(Expr::Op::Div, std::move(left), parse_unary());
            else
                return left;
        }
    }

    ExprPtr parse_unary() {
        skip_ws();
        if (eat("-")) return Expr::make_unary(Expr::Op::Neg, parse_unary());
        return parse_primary();
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of expression");
        char c = src[pos];
        if (c == '(') {
            ++pos;
            auto inner = parse_or();
            skip_ws();
            if (!eat(")")) fail("expected ')'");
            return inner;
        }
        if (c == '"' || c == '\'') return Expr::make_literal(parse_string(c));
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            double d = std::strtod(src.c_str() + pos, &end);
            if (end == src.c_str() + pos) fail("bad number");
            pos = static_cast<std::size_t>(end - src.c_str());
            return Expr::make_literal(d);
        }
        if (eat_word("true")) return Expr::make_literal(true);
        if (eat_word("false")) return Expr::make_literal(false);
        if (eat_word("null")) return Expr::make_literal(Value{});
        if (eat_word("datum")) {
            skip_ws();
            if (eat(".")) return Expr::make_field(parse_ident());
            if (eat("[")) {
                skip_ws();
                if (pos >= src.size() || (src[pos] != '"' && src[pos] != '\''))
                    fail("expected quoted field name");
                Value name = parse_string(src[pos]);
                skip_ws();
                if (!eat("]")) fail("expected ']'");
                return Expr::make_field(std::get<std::string>(name));
            }
            fail("expected '.' or '[' after datum");
        }
        fail("unexpected token");
    }

    Value parse_string(char quote) {
        ++pos;  // opening quote
        std::string out;
        while (pos < src.size() && src[pos] != quote) {
            if (src[pos] == '\\' && pos + 1 < src.size()) {
                out += src[pos + 1];
                pos += 2;
            } else {
                out += src[pos];
                ++pos;
            }
        }
        if (pos >= src.size()) fail("unterminated string");
        ++pos;  // closing quote
        return out;
    }
};

int compare_values(const Value& a, const Value& b) {
    if (is_text(a) && is_text(b)) {
        const auto& sa = std::get<std::string>(a);
        const auto& sb = std::get<std::string>(b);
        return sa < sb ? -1 : (sa == sb ? 0 : 1);
    }
    double da = as_number(a), db = as_number(b);
    if (std::isnan(da) || std::isnan(db))
        throw Error(Error::Kind::Eval, "cannot compare non-numeric values");
    return da < db ? -1 : (da == db ? 0 : 1);
}

double numeric_operand(const Value& v, const char* what) {
    if (is_number(v)) return std::get<double>(v);
    if (is_bool(v)) return std::get<bool>(v) ? 1.0 : 0.0;
    throw Error(Error::Kind::Eval, std::string("non-numeric operand for ") + what);
}

}  // namespace

ExprPtr parse_expr(const std::string& text) {
    Parser p(text);
    auto e = p.parse_or();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return e;
}

const Value& Datum::get(const std::string& field) const {
    return table_->at(row_, field);
}

Value eval_expr(const Expr& e, const Datum& datum) {
    using Op = Expr::Op;
    switch (e.op) {
        case Op::Literal: return e.literal;
        case Op::Field: return datum.get(e.field);
        case Op::Neg: return -numeric_operand(eval_expr(*e.lhs, datum), "negation");
        case Op::Not: return !truthy(eval_expr(*e.lhs, datum));
        case Op::And: {
            Value l = eval_expr(*e.lhs, datum);
            if (!truthy(l)) return false;
            return truthy(eval_expr(*e.rhs, datum));
        }
        case Op::Or: {
            Value l = eval_expr(*e.lhs, datum);
            if (truthy(l)) return true;
            return truthy(eval_expr(*e.rhs, datum));
        }
        default: break;
    }
    Value l = eval_expr(*e.lhs, datum);
    Value r = eval_expr(*e.rhs, datum);
    switch (e.op) {
        case Op::Add:
            if (is_text(l) || is_text(r))
                return value_to_text(l) + value_to_text(r);
            return numeric_operand(l, "+") + numeric_operand(r, "+");
        case Op::Sub: return numeric_operand(l, "-") - numeric_operand(r, "-");
        case Op::Mul: return numeric_operand(l, "*") * numeric_operand(r, "*");
        case Op::Div: {
            double d = numeric_operand(r, "/");
            if (d == 0.0) throw Error(Error::Kind::Eval, "division by zero");
            return numeric_operand(l, "/") / d;
        }
        case Op::Eq: return value_equal(l, r);
        case Op::Ne: return !value_equal(l, r);
        case Op::Lt: return compare_values(l, r) < 0;
        case Op::Le: return compare_values(l, r) <= 0;
        case Op::Gt: return compare_values(l, r) > 0;
        case Op::Ge: return compare_values(l, r) >= 0;
        default:
            throw Error(Error::Kind::Eval, "bad expression node");
    }
}

namespace {

const char* op_token(Expr::Op op) {
    using Op = Expr::Op;
    switch (op) {
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "/";
        case Op::Eq: return "==";
        case Op::Ne: return "!=";
        case Op::Lt: return "<";
        case Op::Le: return "<=";
        case Op::Gt: return ">";
        case Op::Ge: return ">=";
        case Op::And: return "&&";
        case Op::Or: return "||";
        default: return "?";
    }
}

bool plain_ident(const std::string& s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

}  // namespace

std::string expr_to_string(const Expr& e) {
    using Op = Expr::Op;
    switch (e.op) {
        case Op::Literal:
            if (is_text(e.literal)) {
                std::string out = "\"";
                for (char c : std::get<std::string>(e.literal)) {
                    if (c == '"' || c == '\\') out += '\\';
                    out += c;
                }
                return out + "\"";
            }
            if (is_number(e.literal)) {
                // full precision so printing then parsing is lossless
                char buf[40];
                std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(e.literal));
                return buf;
            }
            return value_to_text(e.literal);
        case Op::Field:
            if (plain_ident(e.field)) return "datum." + e.field;
            return "datum[\"" + e.field + "\"]";
        case Op::Neg: return "(-" + expr_to_string(*e.lhs) + ")";
        case Op::Not: return "(!" + expr_to_string(*e.lhs) + ")";
        default:
            return "(" + expr_to_string(*e.lhs) + " " + op_token(e.op) + " " +
                   expr_to_string(*e.rhs) + ")";
    }
}

}  // namespace erie
