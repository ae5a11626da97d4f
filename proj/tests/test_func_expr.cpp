#include "doctest.h"

#include "msp/errors.hpp"
#include "msp/func_expr.hpp"
#include "msp/rng.hpp"

#include <cmath>
#include <numbers>

using namespace msp;

namespace {

double eval(const char* src, double t = 0.0) { return eval_expr(parse_expr(src), t); }

std::size_t error_offset(const char* src) {
    try {
        (void)parse_expr(src);
    } catch (const ParseError& e) {
        return e.offset();
    }
    FAIL("expected a parse error for ", src);
    return 0;
}

}  // namespace

TEST_CASE("parse and evaluate the documented examples") {
    CHECK(eval("1.5+0.3*sin(2*pi*t)", 0.25) == doctest::Approx(1.8).epsilon(1e-15));
    CHECK(eval("t^2", 3.0) == 9.0);
    CHECK(eval("abs(t-0.5)^0.5", 0.5) == 0.0);
    CHECK(eval("min(2,t)", 3.0) == 2.0);
    CHECK(eval("max(2,t)", 3.0) == 3.0);
    CHECK(eval("pow(2,10)") == 1024.0);
    CHECK(eval("e") == std::numbers::e);
    CHECK(eval("exp(log(7))") == doctest::Approx(7.0));
    CHECK(eval("sqrt(16)+cos(0)") == 5.0);
    CHECK(eval("1e-3*1E2") == doctest::Approx(0.1));
}

TEST_CASE("precedence and associativity") {
    CHECK(eval("2+3*4") == 14.0);
    CHECK(eval("2^3^2") == 512.0);
    CHECK(eval("-2^2") == -4.0);
    CHECK(eval("(-2)^2") == 4.0);
    CHECK(eval("10-4-3") == 3.0);
    CHECK(eval("64/4/2") == 8.0);
    CHECK(eval("2^-1") == 0.5);
    CHECK(eval("-t*3", 2.0) == -6.0);
    CHECK(eval("2*-3") == -6.0);
    CHECK(eval("+4") == 4.0);
}

TEST_CASE("syntax errors carry byte offsets") {
    CHECK(error_offset("1.5+") == 4);
    CHECK(error_offset("") == 0);
    CHECK(error_offset("2*(t+1") == 6);
    CHECK(error_offset("3 4") == 2);
    CHECK(error_offset("t $ 2") == 2);
    CHECK(error_offset("1+foo(t)") == 2);   // unknown identifier
    CHECK(error_offset("x+1") == 0);        // only t is a variable
    CHECK(error_offset("1+min(t)") == 2);   // wrong arity
    CHECK(error_offset("sin(t,t)") == 0);
    CHECK(error_offset("2e") == 1);         // dangling exponent leaves 'e' as a stray token
}

TEST_CASE("evaluation domain errors") {
    CHECK_THROWS_AS(eval("log(t)", 0.0), DomainError);
    CHECK_THROWS_AS(eval("log(t)", -1.0), DomainError);
    CHECK_THROWS_AS(eval("sqrt(t)", -1.0), DomainError);
    CHECK_THROWS_AS(eval("0^(-1)"), DomainError);
    CHECK_THROWS_AS(eval("(t-1)^0.5", 0.0), DomainError);
    CHECK_THROWS_AS(eval("1/t", 0.0), DomainError);
    CHECK_THROWS_AS(eval("exp(1000)"), DomainError);
    CHECK(eval("(t-1)^3", 0.0) == -1.0);  // integer powers of negatives are real
}

TEST_CASE("central finite differences") {
    CHECK(fd_derivative(parse_expr("t^2"), 1.0, 1e-5) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(std::fabs(fd_derivative(parse_expr("sin(t)"), 0.0, 1e-5) - 1.0) <= 1e-9);
    CHECK(fd_derivative(parse_expr("3"), 0.7, 1e-5) == 0.0);
    CHECK_THROWS_AS((void)fd_derivative(parse_expr("log(t)"), 0.0, 1e-5), DomainError);
}

TEST_CASE("validate_range reports range and pass/fail") {
    const Interval unit{0.0, 1.0};
    auto rep = validate_range(FuncSpec("1.5+0.3*sin(2*pi*t)", unit), 1.1, 1.9, 1001);
    CHECK(rep.passed);
    CHECK(rep.min == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(rep.max == doctest::Approx(1.8).epsilon(1e-12));

    CHECK_FALSE(validate_range(FuncSpec("2.5", unit), 0.0, 2.0, 11).passed);
    CHECK(validate_range(FuncSpec("0.7", unit), 0.0, 1.0, 11).passed);
    CHECK_THROWS_AS((void)validate_range(FuncSpec("0.7", unit), 0.0, 1.0, 1), ConfigError);
    CHECK_THROWS_AS((void)validate_range(FuncSpec("log(t)", unit), 0.0, 1.0, 5), DomainError);
}

TEST_CASE("constness detection") {
    CHECK(parse_expr("2*pi").is_constant());
    CHECK_FALSE(parse_expr("2*t").is_constant());
}

TEST_CASE("print-parse fixpoint over random t") {
    const char* sources[] = {
        "1.5+0.3*sin(2*pi*t)", "0.8+0.1*abs(t-0.5)^0.5", "-2^2+t^3^0.5", "min(t,1-t)*max(0.1,t/3)",
        "exp(-t)/(1+t^2)",     "pow(abs(t),1.5)-sqrt(abs(t)+0.1)", "0.7+0.1*t", "cos(t)-e*log(1+abs(t))",
    };
    Xoshiro256pp rng(42);
    for (const char* src : sources) {
        const ExprAst a = parse_expr(src);
        const ExprAst b = parse_expr(a.to_string());
        CHECK(b.to_string() == a.to_string());
        for (int k = 0; k < 100; ++k) {
            const double t = 2.0 * rng.uniform() - 0.5;
            double va = 0.0;
            bool a_ok = true;
            try {
                va = eval_expr(a, t);
            } catch (const DomainError&) {
                a_ok = false;
            }
            if (a_ok) {
                CHECK(eval_expr(b, t) == va);
            } else {
                CHECK_THROWS_AS((void)eval_expr(b, t), DomainError);
            }
        }
    }
}

TEST_CASE("evaluation is deterministic") {
    const ExprAst a = parse_expr("1.7+0.2*sin(2*pi*t)");
    for (double t : {0.1, 0.3, 0.77}) CHECK(eval_expr(a, t) == eval_expr(a, t));
}
