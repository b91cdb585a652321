#pragma once

// Tiny arithmetic expression language for germ configurations:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
// Functions: sin, cos, ln, exp, abs, sqrt, pow(a, b).

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace germlens {

class ExprError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Expr {
public:
    using Env = std::map<std::string, double, std::less<>>;

    static Expr parse(std::string_view text)
    {
        Parser p{text, 0};
        Expr e;
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size())
            throw ExprError("unexpected '" + std::string(1, text[p.pos]) + "' at offset " + std::to_string(p.pos));
        e.text_ = std::string(text);
        return e;
    }

    double eval(const Env& env) const
    {
        if (!root_) throw ExprError("empty expression");
        return root_->eval(env);
    }

    /// Convenience for single-variable expressions.
    double operator()(std::string_view var, double value) const
    {
        Env env;
        env.emplace(std::string(var), value);
        return eval(env);
    }

    const std::string& text() const { return text_; }

private:
    struct Node {
        enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
        double value = 0.0;
        std::string name;
        std::vector<std::unique_ptr<Node>> args;

        double eval(const Env& env) const
        {
            switch (kind) {
            case Kind::Number: return value;
            case Kind::Var: {
                auto it = env.find(name);
                if (it == env.end()) throw ExprError("unbound variable '" + name + "'");
                return it->second;
            }
            case Kind::Neg: return -args[0]->eval(env);
            case Kind::Add: return args[0]->eval(env) + args[1]->eval(env);
            case Kind::Sub: return args[0]->eval(env) - args[1]->eval(env);
            case Kind::Mul: return args[0]->eval(env) * args[1]->eval(env);
            case Kind::Div: return args[0]->eval(env) / args[1]->eval(env);
            case Kind::Pow: return std::pow(args[0]->eval(env), args[1]->eval(env));
            case Kind::Call: return call(env);
            }
            return 0.0;
        }

        double call(const Env& env) const
        {
            const double a = args[0]->eval(env);
            if (name == "sin") return std::sin(a);
            if (name == "cos") return std::cos(a);
            if (name == "ln") return std::log(a);
            if (name == "exp") return std::exp(a);
            if (name == "abs") return std::fabs(a);
            if (name == "sqrt") return std::sqrt(a);
            if (name == "pow") return std::pow(a, args[1]->eval(env));
            throw ExprError("unknown function '" + name + "'");
        }
    };

    struct Parser {
        std::string_view s;
        std::size_t pos;

        void skip_ws()
        {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c)
        {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        static std::unique_ptr<Node> make(Node::Kind k, std::unique_ptr<Node> a, std::unique_ptr<Node> b = {})
        {
            auto n = std::make_unique<Node>();
            n->kind = k;
            n->args.push_back(std::move(a));
            if (b) n->args.push_back(std::move(b));
            return n;
        }

        std::unique_ptr<Node> parse_expr()
        {
            auto lhs = parse_term();
            for (;;) {
                if (eat('+')) lhs = make(Node::Kind::Add, std::move(lhs), parse_term());
                else if (eat('-')) lhs = make(Node::Kind::Sub, std::move(lhs), parse_term());
                else return lhs;
            }
        }
        std::unique_ptr<Node> parse_term()
        {
            auto lhs = parse_unary();
            for (;;) {
                if (eat('*')) lhs = make(Node::Kind::Mul, std::move(lhs), parse_unary());
                else if (eat('/')) lhs = make(Node::Kind::Div, std::move(lhs), parse_unary());
                else return lhs;
            }
        }
        std::unique_ptr<Node> parse_unary()
        {
            if (eat('-')) return make(Node::Kind::Neg, parse_unary());
            if (eat('+')) return parse_unary();
            return parse_power();
        }
        std::unique_ptr<Node> parse_power()
        {
            auto base = parse_atom();
            if (eat('^')) return make(Node::Kind::Pow, std::move(base), parse_unary());
            return base;
        }
        std::unique_ptr<Node> parse_atom()
        {
            skip_ws();
            if (pos >= s.size()) throw ExprError("unexpected end of expression");
            const char c = s[pos];
            if (c == '(') {
                ++pos;
                auto inner = parse_expr();
                if (!eat(')')) throw ExprError("missing ')' at offset " + std::to_string(pos));
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                const double v = std::stod(std::string(s.substr(pos)), &used);
                pos += used;
                auto n = std::make_unique<Node>();
                n->kind = Node::Kind::Number;
                n->value = v;
                return n;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                std::string name(s.substr(start, pos - start));
                if (eat('(')) {
                    auto n = std::make_unique<Node>();
                    n->kind = Node::Kind::Call;
                    n->name = name;
                    n->args.push_back(parse_expr());
                    while (eat(',')) n->args.push_back(parse_expr());
                    if (!eat(')')) throw ExprError("missing ')' after arguments of " + name);
                    const std::size_t want = name == "pow" ? 2 : 1;
                    if (n->args.size() != want) throw ExprError("wrong number of arguments to " + name);
                    return n;
                }
                auto n = std::make_unique<Node>();
                if (name == "pi") {
                    n->kind = Node::Kind::Number;
                    n->value = 3.14159265358979323846;
                } else {
                    n->kind = Node::Kind::Var;
                    n->name = std::move(name);
                }
                return n;
            }
            throw ExprError("unexpected '" + std::string(1, c) + "' at offset " + std::to_string(pos));
        }
    };

    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace germlens
