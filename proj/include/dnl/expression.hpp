#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace dnl {

// Arithmetic expressions in one variable for coefficient fields such as
// kappa(x). Grammar:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := number | 'x' | 'pi' | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
//
class Expression {
public:
    static Expression parse(const std::string& src) {
        Parser p{src, 0};
        Expression e;
        e.source_ = src;
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != src.size())
            throw std::invalid_argument("expression: trailing input at position " + std::to_string(p.pos) +
                                        " in \"" + src + "\"");
        return e;
    }

    double operator()(double x) const { return eval(root_.get(), x); }

    const std::string& source() const { return source_; }

private:
    enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp };

    struct Node {
        Op op;
        double value = 0.0;
        std::unique_ptr<Node> lhs, rhs;
    };

    static double eval(const Node* n, double x) {
        switch (n->op) {
            case Op::Const: return n->value;
            case Op::Var: return x;
            case Op::Add: return eval(n->lhs.get(), x) + eval(n->rhs.get(), x);
            case Op::Sub: return eval(n->lhs.get(), x) - eval(n->rhs.get(), x);
            case Op::Mul: return eval(n->lhs.get(), x) * eval(n->rhs.get(), x);
            case Op::Div: return eval(n->lhs.get(), x) / eval(n->rhs.get(), x);
            case Op::Neg: return -eval(n->lhs.get(), x);
            case Op::Sin: return std::sin(eval(n->lhs.get(), x));
            case Op::Cos: return std::cos(eval(n->lhs.get(), x));
            case Op::Exp: return std::exp(eval(n->lhs.get(), x));
        }
        return 0.0;
    }

    struct Parser {
        const std::string& src;
        std::size_t pos;

        void skip_ws() {
            while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        }

        bool consume(char c) {
            skip_ws();
            if (pos < src.size() && src[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        [[noreturn]] void fail(const std::string& what) {
            throw std::invalid_argument("expression: " + what + " at position " + std::to_string(pos) +
                                        " in \"" + src + "\"");
        }

        std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> l = nullptr, std::unique_ptr<Node> r = nullptr) {
            auto n = std::make_unique<Node>();
            n->op = op;
            n->lhs = std::move(l);
            n->rhs = std::move(r);
            return n;
        }

        std::unique_ptr<Node> parse_expr() {
            auto lhs = parse_term();
            for (;;) {
                if (consume('+'))
                    lhs = make(Op::Add, std::move(lhs), parse_term());
                else if (consume('-'))
                    lhs = make(Op::Sub, std::move(lhs), parse_term());
                else
                    return lhs;
            }
        }

        std::unique_ptr<Node> parse_term() {
            auto lhs = parse_unary();
            for (;;) {
                if (consume('*'))
                    lhs = make(Op::Mul, std::move(lhs), parse_unary());
                else if (consume('/'))
                    lhs = make(Op::Div, std::move(lhs), parse_unary());
                else
                    return lhs;
            }
        }

        std::unique_ptr<Node> parse_unary() {
            if (consume('-')) return make(Op::Neg, parse_unary());
            return parse_primary();
        }

        bool consume_word(const char* w) {
            skip_ws();
            std::size_t n = 0;
            while (w[n] != '\0') ++n;
            if (src.compare(pos, n, w) != 0) return false;
            const std::size_t end = pos + n;
            if (end < src.size() && (std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_'))
                return false;
            pos = end;
            return true;
        }

        std::unique_ptr<Node> parse_primary() {
            skip_ws();
            if (pos >= src.size()) fail("unexpected end of input");

            if (consume('(')) {
                auto inner = parse_expr();
                if (!consume(')')) fail("expected ')'");
                return inner;
            }
            for (auto [word, op] : {std::pair{"sin", Op::Sin}, std::pair{"cos", Op::Cos}, std::pair{"exp", Op::Exp}}) {
                if (consume_word(word)) {
                    if (!consume('(')) fail("expected '(' after function name");
                    auto arg = parse_expr();
                    if (!consume(')')) fail("expected ')'");
                    return make(op, std::move(arg));
                }
            }
            if (consume_word("pi")) {
                auto n = make(Op::Const);
                n->value = 3.14159265358979323846;
                return n;
            }
            if (consume_word("x")) return make(Op::Var);

            const char c = src[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = src.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin) fail("malformed number");
                pos += static_cast<std::size_t>(end - begin);
                auto n = make(Op::Const);
                n->value = v;
                return n;
            }
            fail(std::string("unexpected character '") + c + "'");
        }
    };

    std::string source_;
    std::shared_ptr<const Node> root_;  // immutable after parse, so copies share
};

}  // namespace dnl
