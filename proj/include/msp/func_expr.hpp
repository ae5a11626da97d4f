#pragma once

// Arithmetic-expression DSL for the model functions alpha(t), H(t), b(t).
//
// Grammar (precedence high to low):
//   primary : number | t | pi | e | name '(' args ')' | '(' expr ')'
//   power   : primary ('^' unary)?          right associative
//   unary   : ('-' | '+') unary | power     so -2^2 == -(2^2)
//   term    : unary (('*' | '/') unary)*    left associative
//   expr    : term (('+' | '-') term)*      left associative

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace msp {

enum class ExprKind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class ExprFunc { Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max, Pow };

/// Immutable expression tree. Children are shared so copies are cheap.
struct ExprNode {
    ExprKind kind = ExprKind::Constant;
    double value = 0.0;        // Constant
    std::string name;          // Constant ("pi", "e" or empty for literals), Call
    ExprFunc func = ExprFunc::Sin;
    std::vector<std::shared_ptr<const ExprNode>> children;
};

class ExprAst {
public:
    ExprAst() = default;
    explicit ExprAst(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

    [[nodiscard]] const ExprNode& root() const { return *root_; }
    [[nodiscard]] bool empty() const noexcept { return root_ == nullptr; }

    /// True when the tree contains no reference to t.
    [[nodiscard]] bool is_constant() const;

    /// Fully parenthesised text that parses back to an equivalent tree.
    [[nodiscard]] std::string to_string() const;

private:
    std::shared_ptr<const ExprNode> root_;
};

/// Throws ParseError (with byte offset) on syntax errors, unknown
/// identifiers and wrong call arity.
[[nodiscard]] ExprAst parse_expr(std::string_view source);

/// Throws DomainError for log of a non-positive value, sqrt of a negative,
/// 0 to a negative power, fractional power of a negative base, and any
/// non-finite intermediate or final result.
[[nodiscard]] double eval_expr(const ExprAst& ast, double t);

/// Central difference (f(t+step) - f(t-step)) / (2 step).
[[nodiscard]] double fd_derivative(const ExprAst& ast, double t, double step);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    [[nodiscard]] double width() const noexcept { return hi - lo; }
};

/// A parsed model function together with the interval on which it is used.
class FuncSpec {
public:
    FuncSpec() = default;
    FuncSpec(std::string source, Interval domain);

    [[nodiscard]] double operator()(double t) const { return eval_expr(ast_, t); }

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] const ExprAst& ast() const noexcept { return ast_; }
    [[nodiscard]] const Interval& domain() const noexcept { return domain_; }
    [[nodiscard]] bool is_constant() const { return ast_.is_constant(); }

private:
    std::string source_;
    ExprAst ast_;
    Interval domain_;
};

struct RangeReport {
    bool passed = false;
    double min = 0.0;
    double max = 0.0;
    double argmin = 0.0;
    double argmax = 0.0;
    int grid_n = 0;
};

/// Evaluates `fs` on grid_n equally spaced points covering the closed
/// domain and checks every value lies in [lo, hi]. An evaluation failure is
/// rethrown as DomainError naming the grid point.
[[nodiscard]] RangeReport validate_range(const FuncSpec& fs, double lo, double hi, int grid_n);

}  // namespace msp
