#include "tauflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

namespace tauflow {

namespace {

struct Node {
    virtual ~Node() = default;
    virtual double eval(const Point& x) const = 0;
};
using NodePtr = std::unique_ptr<Node>;

struct Const : Node {
    double v;
    explicit Const(double v_) : v(v_) {}
    double eval(const Point&) const override { return v; }
};

struct Var : Node {
    int axis; // 0..2, or -1 for |x|
    explicit Var(int a) : axis(a) {}
    double eval(const Point& x) const override {
        if (axis >= 0) return x[static_cast<size_t>(axis)];
        return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    }
};

struct Unary : Node {
    double (*fn)(double);
    NodePtr arg;
    Unary(double (*f)(double), NodePtr a) : fn(f), arg(std::move(a)) {}
    double eval(const Point& x) const override { return fn(arg->eval(x)); }
};

struct Binary : Node {
    char op;
    double (*fn)(double, double); // used when op == 'f'
    NodePtr lhs, rhs;
    Binary(char o, NodePtr l, NodePtr r, double (*f)(double, double) = nullptr)
        : op(o), fn(f), lhs(std::move(l)), rhs(std::move(r)) {}
    double eval(const Point& x) const override {
        const double a = lhs->eval(x), b = rhs->eval(x);
        switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        case '^': return std::pow(a, b);
        case 'f': return fn(a, b);
        }
        return 0.0;
    }
};

struct Parser {
    const std::string& s;
    size_t pos = 0;
    int dim;

    Parser(const std::string& text, int dim_) : s(text), dim(dim_) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("expression error at position " + std::to_string(pos) + ": " +
                                    msg);
    }
    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos != s.size()) fail("trailing input");
        return e;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            if (eat('+')) lhs = std::make_unique<Binary>('+', std::move(lhs), term());
            else if (eat('-')) lhs = std::make_unique<Binary>('-', std::move(lhs), term());
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = power();
        while (true) {
            if (eat('*')) lhs = std::make_unique<Binary>('*', std::move(lhs), power());
            else if (eat('/')) lhs = std::make_unique<Binary>('/', std::move(lhs), power());
            else return lhs;
        }
    }
    NodePtr power() {
        NodePtr base = unary();
        if (eat('^')) return std::make_unique<Binary>('^', std::move(base), power());
        return base;
    }
    NodePtr unary() {
        if (eat('-')) return std::make_unique<Binary>('-', std::make_unique<Const>(0.0), unary());
        if (eat('+')) return unary();
        return atom();
    }

    NodePtr atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of input");
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        size_t end = pos;
        while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) ||
                                  s[end] == '.' || s[end] == 'e' || s[end] == 'E' ||
                                  ((s[end] == '+' || s[end] == '-') && end > pos &&
                                   (s[end - 1] == 'e' || s[end - 1] == 'E'))))
            ++end;
        try {
            size_t used = 0;
            const double v = std::stod(s.substr(pos, end - pos), &used);
            pos += used;
            return std::make_unique<Const>(v);
        } catch (const std::exception&) {
            fail("bad numeric literal");
        }
    }

    NodePtr identifier() {
        size_t end = pos;
        while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
            ++end;
        const std::string name = s.substr(pos, end - pos);
        pos = end;

        if (name == "pi") return std::make_unique<Const>(3.14159265358979323846);
        if (name == "e") return std::make_unique<Const>(2.71828182845904523536);
        if (name == "x" || name == "x1") return std::make_unique<Var>(0);
        if (name == "x2") {
            if (dim < 2) fail("x2 used in a 1-d expression");
            return std::make_unique<Var>(1);
        }
        if (name == "x3") {
            if (dim < 3) fail("x3 used with dim < 3");
            return std::make_unique<Var>(2);
        }
        if (name == "r") return std::make_unique<Var>(-1);

        static const std::map<std::string, double (*)(double)> unary_fns = {
            {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
            {"atan", std::atan}, {"exp", std::exp},   {"log", std::log},
            {"sqrt", std::sqrt}, {"abs", std::fabs},  {"tanh", std::tanh},
            {"sinh", std::sinh}, {"cosh", std::cosh},
        };
        static const std::map<std::string, double (*)(double, double)> binary_fns = {
            {"pow", [](double a, double b) { return std::pow(a, b); }},
            {"min", [](double a, double b) { return a < b ? a : b; }},
            {"max", [](double a, double b) { return a > b ? a : b; }},
            {"atan2", [](double a, double b) { return std::atan2(a, b); }},
        };
        if (auto it = unary_fns.find(name); it != unary_fns.end()) {
            if (!eat('(')) fail("expected '(' after " + name);
            NodePtr arg = expr();
            if (!eat(')')) fail("expected ')'");
            return std::make_unique<Unary>(it->second, std::move(arg));
        }
        if (auto it = binary_fns.find(name); it != binary_fns.end()) {
            if (!eat('(')) fail("expected '(' after " + name);
            NodePtr a = expr();
            if (!eat(',')) fail("expected ',' in " + name);
            NodePtr b = expr();
            if (!eat(')')) fail("expected ')'");
            return std::make_unique<Binary>('f', std::move(a), std::move(b), it->second);
        }
        fail("unknown identifier '" + name + "'");
    }
};

} // namespace

std::function<double(const Point&)> compile_expression(const std::string& text, int dim) {
    Parser p(text, dim);
    std::shared_ptr<Node> root{p.parse().release()};
    return [root](const Point& x) { return root->eval(x); };
}

} // namespace tauflow
