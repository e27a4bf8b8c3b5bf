#include "chemostokes/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace chemostokes {

class ExpressionParser {
public:
    explicit ExpressionParser(const std::string& text) : text_(text) {}

    Expression run() {
        Expression e;
        e.text_ = text_;
        parse_expr(e.code_);
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        if (e.code_.empty()) fail("empty expression");

        int depth = 0, peak = 0;
        for (const Instr& ins : e.code_) {
            switch (ins.op) {
                case Op::PushConst:
                case Op::PushX:
                case Op::PushY: ++depth; break;
                case Op::Neg:
                case Op::Sin:
                case Op::Cos:
                case Op::Exp:
                case Op::Ln: break;
                default: --depth; break;
            }
            peak = std::max(peak, depth);
        }
        if (peak > 60) fail("expression too deeply nested");
        return e;
    }

private:
    using Instr = Expression::Instr;
    using Op = Expression::Op;

    const std::string& text_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) {
        throw ExpressionParseError("expression parse error at position " +
                                       std::to_string(pos_) + ": " + msg + " in \"" + text_ +
                                       "\"",
                                   pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void parse_expr(std::vector<Instr>& out) {
        parse_term(out);
        while (true) {
            if (consume('+')) {
                parse_term(out);
                out.push_back({Op::Add});
            } else if (consume('-')) {
                parse_term(out);
                out.push_back({Op::Sub});
            } else {
                return;
            }
        }
    }

    void parse_term(std::vector<Instr>& out) {
        parse_unary(out);
        while (true) {
            if (consume('*')) {
                parse_unary(out);
                out.push_back({Op::Mul});
            } else if (consume('/')) {
                parse_unary(out);
                out.push_back({Op::Div});
            } else {
                return;
            }
        }
    }

    void parse_unary(std::vector<Instr>& out) {
        if (consume('-')) {
            parse_unary(out);
            out.push_back({Op::Neg});
            return;
        }
        parse_power(out);
    }

    void parse_power(std::vector<Instr>& out) {
        parse_atom(out);
        if (consume('^')) {
            parse_unary(out);  // right-associative
            out.push_back({Op::Pow});
        }
    }

    std::string read_identifier() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    void parse_atom(std::vector<Instr>& out) {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(text_.c_str() + pos_, &end);
            if (end == text_.c_str() + pos_) fail("malformed number");
            pos_ = end - text_.c_str();
            out.push_back({Op::PushConst, v});
            return;
        }
        if (c == '(') {
            ++pos_;
            parse_expr(out);
            if (!consume(')')) fail("missing closing parenthesis");
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::string id = read_identifier();
            if (id == "x") {
                out.push_back({Op::PushX});
                return;
            }
            if (id == "y") {
                out.push_back({Op::PushY});
                return;
            }
            if (id == "pi") {
                out.push_back({Op::PushConst, std::numbers::pi});
                return;
            }
            const auto unary_fn = [&](Op op) {
                if (!consume('(')) fail("expected '(' after " + id);
                parse_expr(out);
                if (!consume(')')) fail("missing ')' after " + id + " argument");
                out.push_back({op});
            };
            if (id == "sin") return unary_fn(Op::Sin);
            if (id == "cos") return unary_fn(Op::Cos);
            if (id == "exp") return unary_fn(Op::Exp);
            if (id == "ln") return unary_fn(Op::Ln);
            if (id == "min" || id == "max") {
                if (!consume('(')) fail("expected '(' after " + id);
                parse_expr(out);
                if (!consume(',')) fail(id + " needs two arguments");
                parse_expr(out);
                if (!consume(')')) fail("missing ')' after " + id + " arguments");
                out.push_back({id == "min" ? Op::Min : Op::Max});
                return;
            }
            fail("unknown identifier '" + id + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

Expression Expression::parse(const std::string& text) {
    return ExpressionParser(text).run();
}

double Expression::eval(double x, double y) const {
    double stack[64];
    int top = -1;
    for (const Instr& ins : code_) {
        switch (ins.op) {
            case Op::PushConst: stack[++top] = ins.value; break;
            case Op::PushX: stack[++top] = x; break;
            case Op::PushY: stack[++top] = y; break;
            case Op::Add: --top; stack[top] += stack[top + 1]; break;
            case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
            case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
            case Op::Div: --top; stack[top] /= stack[top + 1]; break;
            case Op::Pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
            case Op::Neg: stack[top] = -stack[top]; break;
            case Op::Sin: stack[top] = std::sin(stack[top]); break;
            case Op::Cos: stack[top] = std::cos(stack[top]); break;
            case Op::Exp: stack[top] = std::exp(stack[top]); break;
            case Op::Ln: stack[top] = std::log(stack[top]); break;
            case Op::Min: --top; stack[top] = std::min(stack[top], stack[top + 1]); break;
            case Op::Max: --top; stack[top] = std::max(stack[top], stack[top + 1]); break;
        }
    }
    return top >= 0 ? stack[top] : 0.0;
}

}  // namespace chemostokes
