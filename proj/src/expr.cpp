#include "fresnel/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "fresnel/errors.hpp"

namespace fresnel {

struct Expr::Node {
    enum class Op { Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
    Op op = Op::Constant;
    double value = 0.0;
    int variable = -1;
    std::string function;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    NodePtr parse() {
        auto n = expr();
        skip();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("expression \"" + src_ + "\": " + msg + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr make(Op op, std::vector<NodePtr> args) {
        auto n = std::make_shared<Expr::Node>();
        n->op = op;
        n->args = std::move(args);
        return n;
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make(Op::Add, {lhs, term()});
            else if (accept('-'))
                lhs = make(Op::Sub, {lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make(Op::Mul, {lhs, unary()});
            else if (accept('/'))
                lhs = make(Op::Div, {lhs, unary()});
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept('^')) return make(Op::Pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= src_.size()) fail("unexpected end");
        if (accept('(')) {
            auto n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Expr::Node>();
            n->op = Op::Constant;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            std::string name = src_.substr(start, pos_ - start);
            if (accept('(')) {
                static const std::vector<std::string> known = {"sin", "cos", "exp", "log",
                                                                "sqrt", "abs", "pow", "norm"};
                if (std::find(known.begin(), known.end(), name) == known.end())
                    fail("unknown function '" + name + "'");
                auto n = std::make_shared<Expr::Node>();
                n->op = Op::Call;
                n->function = name;
                n->args.push_back(expr());
                while (accept(',')) n->args.push_back(expr());
                if (!accept(')')) fail("expected ')'");
                const std::size_t arity = n->args.size();
                if (name == "pow" ? arity != 2 : (name == "norm" ? arity < 1 : arity != 1))
                    fail("wrong number of arguments to '" + name + "'");
                return n;
            }
            auto it = std::find(vars_.begin(), vars_.end(), name);
            auto n = std::make_shared<Expr::Node>();
            if (it != vars_.end()) {
                n->op = Op::Variable;
                n->variable = static_cast<int>(it - vars_.begin());
            } else if (name == "e") {
                n->value = std::exp(1.0);
            } else if (name == "pi") {
                n->value = M_PI;
            } else {
                fail("unknown identifier '" + name + "'");
            }
            return n;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& src_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

bool is_constant(const Expr::Node& n, double& v) {
    if (n.op == Op::Constant) {
        v = n.value;
        return true;
    }
    if (n.op == Op::Neg && is_constant(*n.args[0], v)) {
        v = -v;
        return true;
    }
    return false;
}

template <class S>
S power(const S& base, const Expr::Node& exponent, std::span<const S> vars);

template <class S>
S evaluate(const Expr::Node& n, std::span<const S> vars) {
    using std::abs;
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    switch (n.op) {
        case Op::Constant:
            if constexpr (std::is_same_v<S, double>)
                return n.value;
            else
                return constant_like(vars[0], n.value);
        case Op::Variable:
            return vars[static_cast<std::size_t>(n.variable)];
        case Op::Neg:
            return -evaluate(*n.args[0], vars);
        case Op::Add:
            return evaluate(*n.args[0], vars) + evaluate(*n.args[1], vars);
        case Op::Sub:
            return evaluate(*n.args[0], vars) - evaluate(*n.args[1], vars);
        case Op::Mul:
            return evaluate(*n.args[0], vars) * evaluate(*n.args[1], vars);
        case Op::Div:
            return evaluate(*n.args[0], vars) / evaluate(*n.args[1], vars);
        case Op::Pow:
            return power(evaluate(*n.args[0], vars), *n.args[1], vars);
        case Op::Call: {
            const std::string& f = n.function;
            if (f == "pow") return power(evaluate(*n.args[0], vars), *n.args[1], vars);
            if (f == "norm") {
                S acc = evaluate(*n.args[0], vars);
                acc = acc * acc;
                for (std::size_t i = 1; i < n.args.size(); ++i) {
                    S a = evaluate(*n.args[i], vars);
                    acc = acc + a * a;
                }
                return sqrt(acc);
            }
            S a = evaluate(*n.args[0], vars);
            if (f == "sin") return sin(a);
            if (f == "cos") return cos(a);
            if (f == "exp") return exp(a);
            if (f == "log") {
                if (value_of(a) <= 0.0) throw DomainError("log of non-positive value");
                return log(a);
            }
            if (f == "sqrt") {
                if (value_of(a) < 0.0) throw DomainError("sqrt of negative value");
                return sqrt(a);
            }
            return abs(a);
        }
    }
    throw UsageError("corrupt expression node");
}

template <class S>
S power(const S& base, const Expr::Node& exponent, std::span<const S> vars) {
    double c = 0.0;
    if (is_constant(exponent, c)) {
        if (c == std::round(c) && std::abs(c) <= 64) return ipow(base, static_cast<int>(c));
        using std::pow;
        if (value_of(base) <= 0.0) throw DomainError("non-integer power of non-positive value");
        return pow(base, c);
    }
    using std::exp;
    using std::log;
    if (value_of(base) <= 0.0) throw DomainError("variable power of non-positive value");
    return exp(evaluate(exponent, vars) * log(base));
}

bool references(const Expr::Node& n, int var) {
    if (n.op == Op::Variable) return n.variable == var;
    return std::any_of(n.args.begin(), n.args.end(), [&](const auto& a) { return references(*a, var); });
}

}  // namespace

Expr Expr::parse(const std::string& source, std::vector<std::string> variables) {
    Expr e;
    e.source_ = source;
    e.variables_ = std::move(variables);
    e.root_ = Parser(e.source_, e.variables_).parse();
    return e;
}

bool Expr::independent_of(const std::string& variable) const {
    auto it = std::find(variables_.begin(), variables_.end(), variable);
    if (it == variables_.end()) return true;
    return !references(*root_, static_cast<int>(it - variables_.begin()));
}

double Expr::operator()(std::span<const double> vars) const {
    if (vars.size() != variables_.size()) throw UsageError("expression called with wrong variable count");
    return evaluate<double>(*root_, vars);
}

Jet Expr::operator()(std::span<const Jet> vars) const {
    if (vars.size() != variables_.size() || vars.empty())
        throw UsageError("expression called with wrong variable count");
    return evaluate<Jet>(*root_, vars);
}

}  // namespace fresnel
