#include "msp/func_expr.hpp"

#include "msp/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

namespace msp {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

struct FuncInfo {
    std::string_view name;
    ExprFunc func;
    int arity;
};

constexpr std::array<FuncInfo, 9> kFunctions{{
    {"sin", ExprFunc::Sin, 1},
    {"cos", ExprFunc::Cos, 1},
    {"exp", ExprFunc::Exp, 1},
    {"log", ExprFunc::Log, 1},
    {"abs", ExprFunc::Abs, 1},
    {"sqrt", ExprFunc::Sqrt, 1},
    {"min", ExprFunc::Min, 2},
    {"max", ExprFunc::Max, 2},
    {"pow", ExprFunc::Pow, 2},
}};

const FuncInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

std::string_view function_name(ExprFunc func) {
    for (const auto& f : kFunctions) {
        if (f.func == func) return f.name;
    }
    return "?";
}

NodePtr make_constant(double v, std::string name = {}) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Constant;
    n->value = v;
    n->name = std::move(name);
    return n;
}

NodePtr make_node(ExprKind kind, std::vector<NodePtr> children) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->children = std::move(children);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
        NodePtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make_node(ExprKind::Add, {lhs, term()});
            } else if (accept('-')) {
                lhs = make_node(ExprKind::Sub, {lhs, term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_node(ExprKind::Mul, {lhs, unary()});
            } else if (accept('/')) {
                lhs = make_node(ExprKind::Div, {lhs, unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make_node(ExprKind::Negate, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make_node(ExprKind::Pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = expr();
            expect(')');
            return inner;
        }
        if (is_digit(c) || c == '.') return number();
        if (is_alpha(c)) return identifier();
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        // Exponent only when digits follow; otherwise 'e' is left for the
        // identifier rule and reported as an unexpected token.
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && is_digit(src_[p])) {
                pos_ = p;
                while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
            }
        }
        double v = 0.0;
        const auto* first = src_.data() + start;
        const auto* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) throw ParseError("malformed number", start);
        return make_constant(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]) || src_[pos_] == '_')) ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);
        if (id == "t") return make_node(ExprKind::Variable, {});
        if (id == "pi") return make_constant(std::numbers::pi, "pi");
        if (id == "e") return make_constant(std::numbers::e, "e");

        const FuncInfo* info = find_function(id);
        if (info == nullptr) throw ParseError("unknown identifier '" + std::string(id) + "'", start);
        expect('(');
        std::vector<NodePtr> args;
        skip_ws();
        if (!(pos_ < src_.size() && src_[pos_] == ')')) {
            args.push_back(expr());
            while (accept(',')) args.push_back(expr());
        }
        expect(')');
        if (static_cast<int>(args.size()) != info->arity) {
            throw ParseError("function '" + std::string(id) + "' expects " + std::to_string(info->arity) +
                                 " argument(s), got " + std::to_string(args.size()),
                             start);
        }
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprKind::Call;
        n->func = info->func;
        n->name = std::string(id);
        n->children = std::move(args);
        return n;
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

    std::string_view src_;
    std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
    return v;
}

double real_pow(double base, double exponent) {
    if (base == 0.0 && exponent < 0.0) throw DomainError("0 raised to a negative power");
    if (base < 0.0 && std::trunc(exponent) != exponent)
        throw DomainError("fractional power of a negative base (wrap the base in abs)");
    return checked(std::pow(base, exponent), "power");
}

double eval_node(const ExprNode& n, double t) {
    switch (n.kind) {
        case ExprKind::Constant: return n.value;
        case ExprKind::Variable: return t;
        case ExprKind::Negate: return -eval_node(*n.children[0], t);
        case ExprKind::Add: return checked(eval_node(*n.children[0], t) + eval_node(*n.children[1], t), "addition");
        case ExprKind::Sub: return checked(eval_node(*n.children[0], t) - eval_node(*n.children[1], t), "subtraction");
        case ExprKind::Mul: return checked(eval_node(*n.children[0], t) * eval_node(*n.children[1], t), "product");
        case ExprKind::Div: {
            const double den = eval_node(*n.children[1], t);
            if (den == 0.0) throw DomainError("division by zero");
            return checked(eval_node(*n.children[0], t) / den, "division");
        }
        case ExprKind::Pow: return real_pow(eval_node(*n.children[0], t), eval_node(*n.children[1], t));
        case ExprKind::Call: {
            const double a = eval_node(*n.children[0], t);
            switch (n.func) {
                case ExprFunc::Sin: return std::sin(a);
                case ExprFunc::Cos: return std::cos(a);
                case ExprFunc::Exp: return checked(std::exp(a), "exp");
                case ExprFunc::Log:
                    if (a <= 0.0) throw DomainError("log of a non-positive value");
                    return std::log(a);
                case ExprFunc::Abs: return std::fabs(a);
                case ExprFunc::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt of a negative value");
                    return std::sqrt(a);
                case ExprFunc::Min: return std::min(a, eval_node(*n.children[1], t));
                case ExprFunc::Max: return std::max(a, eval_node(*n.children[1], t));
                case ExprFunc::Pow: return real_pow(a, eval_node(*n.children[1], t));
            }
        }
    }
    throw DomainError("corrupt expression tree");
}

bool mentions_t(const ExprNode& n) {
    if (n.kind == ExprKind::Variable) return true;
    for (const auto& c : n.children) {
        if (mentions_t(*c)) return true;
    }
    return false;
}

std::string format_literal(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void print_node(const ExprNode& n, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print_node(*n.children[0], out);
        out += op;
        print_node(*n.children[1], out);
        out += ')';
    };
    switch (n.kind) {
        case ExprKind::Constant:
            if (!n.name.empty()) {
                out += n.name;
            } else if (n.value < 0.0) {
                // Literals are non-negative after parsing; kept for hand-built trees.
                out += "(-" + format_literal(-n.value) + ")";
            } else {
                out += format_literal(n.value);
            }
            return;
        case ExprKind::Variable: out += 't'; return;
        case ExprKind::Negate:
            out += "(-";
            print_node(*n.children[0], out);
            out += ')';
            return;
        case ExprKind::Add: binary("+"); return;
        case ExprKind::Sub: binary("-"); return;
        case ExprKind::Mul: binary("*"); return;
        case ExprKind::Div: binary("/"); return;
        case ExprKind::Pow: binary("^"); return;
        case ExprKind::Call:
            out += function_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i > 0) out += ',';
                print_node(*n.children[i], out);
            }
            out += ')';
            return;
    }
}

}  // namespace

bool ExprAst::is_constant() const { return root_ == nullptr || !mentions_t(*root_); }

std::string ExprAst::to_string() const {
    std::string out;
    if (root_) print_node(*root_, out);
    return out;
}

ExprAst parse_expr(std::string_view source) { return ExprAst(Parser(source).parse()); }

double eval_expr(const ExprAst& ast, double t) {
    if (ast.empty()) throw DomainError("evaluating an empty expression");
    return checked(eval_node(ast.root(), t), "expression");
}

double fd_derivative(const ExprAst& ast, double t, double step) {
    if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
    const double hi = eval_expr(ast, t + step);
    const double lo = eval_expr(ast, t - step);
    return (hi - lo) / (2.0 * step);
}

FuncSpec::FuncSpec(std::string source, Interval domain)
    : source_(std::move(source)), ast_(parse_expr(source_)), domain_(domain) {
    if (!(domain_.lo < domain_.hi)) throw ConfigError("function domain must satisfy lo < hi");
}

RangeReport validate_range(const FuncSpec& fs, double lo, double hi, int grid_n) {
    if (grid_n < 2) throw ConfigError("validate_range needs at least two grid points");
    RangeReport rep;
    rep.grid_n = grid_n;
    const Interval d = fs.domain();
    for (int k = 0; k < grid_n; ++k) {
        const double t = k == grid_n - 1 ? d.hi : d.lo + d.width() * k / (grid_n - 1);
        double v = 0.0;
        try {
            v = fs(t);
        } catch (const DomainError& e) {
            throw DomainError("'" + fs.source() + "' failed at t=" + format_literal(t) + ": " + e.what());
        }
        if (k == 0 || v < rep.min) {
            rep.min = v;
            rep.argmin = t;
        }
        if (k == 0 || v > rep.max) {
            rep.max = v;
            rep.argmax = t;
        }
    }
    rep.passed = rep.min >= lo && rep.max <= hi;
    return rep;
}

}  // namespace msp
