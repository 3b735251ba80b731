#pragma once

#include "lienard/error.hpp"
#include "lienard/numdiff.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace lienard::expr {

enum class Fn { Neg, Sqrt, Exp, Ln, Sin, Cos, Sinh, Cosh, Tanh, Abs };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    enum Kind { Const, Var, Unary, Binary } kind;
    double value = 0;
    std::string name;
    Fn fn = Fn::Neg;
    char op = 0;
    Expr a, b;
};

using Bindings = std::map<std::string, double, std::less<>>;

inline const char* fn_name(Fn f)
{
    switch (f) {
    case Fn::Neg: return "-";
    case Fn::Sqrt: return "sqrt";
    case Fn::Exp: return "exp";
    case Fn::Ln: return "ln";
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Sinh: return "sinh";
    case Fn::Cosh: return "cosh";
    case Fn::Tanh: return "tanh";
    case Fn::Abs: return "abs";
    }
    return "?";
}

inline Expr make_const(double v) { return std::make_shared<Node>(Node{Node::Const, v, {}, Fn::Neg, 0, {}, {}}); }
inline Expr make_var(std::string n) { return std::make_shared<Node>(Node{Node::Var, 0, std::move(n), Fn::Neg, 0, {}, {}}); }
inline Expr make_unary(Fn f, Expr a) { return std::make_shared<Node>(Node{Node::Unary, 0, {}, f, 0, std::move(a), {}}); }
inline Expr make_binary(char op, Expr a, Expr b)
{
    return std::make_shared<Node>(Node{Node::Binary, 0, {}, Fn::Neg, op, std::move(a), std::move(b)});
}

namespace detail {

inline Error syntax_error(long offset, const std::string& expected)
{
    Error e(Errc::SyntaxError, "at offset " + std::to_string(offset) + ": expected " + expected);
    e.offset = offset;
    return e;
}

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := ('-'|'+') unary | power
// power  := primary ('^' unary)?      right-associative through unary
// primary:= number | ident | ident '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(std::string_view s) : src_(s) {}

    Expr parse()
    {
        Expr e = expr();
        skip();
        if (pos_ < src_.size()) {
            if (src_[pos_] == ')')
                throw syntax_error(long(pos_), "end of input (unbalanced ')')");
            throw syntax_error(long(pos_), "operator");
        }
        return e;
    }

private:
    std::string_view src_;
    size_t pos_ = 0;

    void skip()
    {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }
    bool accept(char c)
    {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr()
    {
        Expr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make_binary('+', lhs, term());
            else if (accept('-'))
                lhs = make_binary('-', lhs, term());
            else
                return lhs;
        }
    }
    Expr term()
    {
        Expr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make_binary('*', lhs, unary());
            else if (accept('/'))
                lhs = make_binary('/', lhs, unary());
            else
                return lhs;
        }
    }
    Expr unary()
    {
        if (accept('-'))
            return make_unary(Fn::Neg, unary());
        if (accept('+'))
            return unary();
        return power();
    }
    Expr power()
    {
        Expr base = primary();
        if (accept('^'))
            return make_binary('^', base, unary());
        return base;
    }
    Expr primary()
    {
        skip();
        if (pos_ >= src_.size())
            throw syntax_error(long(src_.empty() ? 0 : src_.size() - 1), "operand");
        char c = src_[pos_];
        if (c == '(') {
            size_t open = pos_++;
            Expr e = expr();
            if (!accept(')'))
                throw syntax_error(long(open), "matching ')'");
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return identifier();
        throw syntax_error(long(pos_), "operand");
    }
    Expr number()
    {
        size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
                ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            else
                pos_ = save;
        }
        double v = 0;
        auto r = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (r.ec != std::errc() || r.ptr != src_.data() + pos_)
            throw syntax_error(long(start), "number");
        return make_const(v);
    }
    Expr identifier()
    {
        size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string id(src_.substr(start, pos_ - start));
        skip();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            static const std::map<std::string, Fn> table = {
                {"sqrt", Fn::Sqrt}, {"exp", Fn::Exp}, {"ln", Fn::Ln}, {"log", Fn::Ln},
                {"sin", Fn::Sin}, {"cos", Fn::Cos}, {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh},
                {"tanh", Fn::Tanh}, {"abs", Fn::Abs}};
            auto it = table.find(id);
            if (it == table.end())
                fail(Errc::UnknownFunction, id);
            size_t open = pos_++;
            Expr arg = expr();
            if (!accept(')'))
                throw syntax_error(long(open), "matching ')'");
            return make_unary(it->second, arg);
        }
        return make_var(id);
    }
};

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] inline void non_finite(const std::string& op, double x, double y = NAN)
{
    std::string msg = op + "(" + fmt17(x);
    if (!std::isnan(y) || op.size() == 1)
        msg += ", " + fmt17(y);
    fail(Errc::NonFinite, msg + ")");
}

}

inline Expr parse(std::string_view src) { return detail::Parser(src).parse(); }

/// Fully parenthesised canonical form; parse(print(e)) evaluates bit-identically.
inline std::string print(const Expr& e)
{
    switch (e->kind) {
    case Node::Const: return detail::fmt17(e->value);
    case Node::Var: return e->name;
    case Node::Unary:
        if (e->fn == Fn::Neg)
            return "(-" + print(e->a) + ")";
        return std::string(fn_name(e->fn)) + "(" + print(e->a) + ")";
    case Node::Binary: return "(" + print(e->a) + " " + e->op + " " + print(e->b) + ")";
    }
    return {};
}

inline double eval(const Expr& e, const Bindings& env)
{
    switch (e->kind) {
    case Node::Const: return e->value;
    case Node::Var: {
        auto it = env.find(e->name);
        if (it != env.end())
            return it->second;
        if (e->name == "pi")
            return M_PI;
        fail(Errc::UnboundVariable, e->name);
    }
    case Node::Unary: {
        double a = eval(e->a, env);
        double r = 0;
        switch (e->fn) {
        case Fn::Neg: r = -a; break;
        case Fn::Sqrt:
            if (a < 0)
                detail::non_finite("sqrt", a);
            r = std::sqrt(a);
            break;
        case Fn::Exp: r = std::exp(a); break;
        case Fn::Ln:
            if (a <= 0)
                detail::non_finite("ln", a);
            r = std::log(a);
            break;
        case Fn::Sin: r = std::sin(a); break;
        case Fn::Cos: r = std::cos(a); break;
        case Fn::Sinh: r = std::sinh(a); break;
        case Fn::Cosh: r = std::cosh(a); break;
        case Fn::Tanh: r = std::tanh(a); break;
        case Fn::Abs: r = std::abs(a); break;
        }
        if (!std::isfinite(r))
            detail::non_finite(fn_name(e->fn), a);
        return r;
    }
    case Node::Binary: {
        double a = eval(e->a, env), b = eval(e->b, env);
        double r = 0;
        switch (e->op) {
        case '+': r = a + b; break;
        case '-': r = a - b; break;
        case '*': r = a * b; break;
        case '/': r = a / b; break;
        case '^': r = std::pow(a, b); break;
        }
        if (!std::isfinite(r))
            detail::non_finite(std::string(1, e->op), a, b);
        return r;
    }
    }
    return 0;
}

inline double eval(std::string_view src, const Bindings& env) { return eval(parse(src), env); }

/// d^order/d var^order at `at`, all other bindings held fixed.
inline Derivative numeric_derivative(const Expr& e, const std::string& var, double at, int order, Bindings env = {})
{
    if (order != 1 && order != 2)
        fail(Errc::DomainError, "derivative order must be 1 or 2");
    auto f = [&](double x) {
        env[var] = x;
        return eval(e, env);
    };
    return richardson_derivative(f, at, order);
}

}
