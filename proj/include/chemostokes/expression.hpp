#pragma once

#include <string>
#include <vector>

#include "chemostokes/errors.hpp"

namespace chemostokes {

/// Minimal arithmetic expression over the variables x, y: operators
/// + - * / ^, functions sin cos exp ln min max, constant pi, parentheses.
/// Parsed once into a small stack program; evaluation is pure.
class Expression {
public:
    Expression() = default;
    static Expression parse(const std::string& text);

    double eval(double x, double y) const;
    const std::string& text() const { return text_; }
    bool empty() const { return code_.empty(); }

private:
    enum class Op : unsigned char {
        PushConst, PushX, PushY, Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Exp, Ln, Min, Max
    };
    struct Instr {
        Op op;
        double value = 0.0;
    };
    std::vector<Instr> code_;
    std::string text_;

    friend class ExpressionParser;
};

class ExpressionParseError : public ContractError {
public:
    ExpressionParseError(const std::string& what, size_t position)
        : ContractError(what), position_(position) {}
    size_t position() const { return position_; }

private:
    size_t position_ = 0;
};

}  // namespace chemostokes
