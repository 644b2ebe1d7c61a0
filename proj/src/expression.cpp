#include "delaystab/expression.hpp"

#include "delaystab/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace delaystab {

namespace {

class Parser {
public:
    Parser(std::string_view text, const std::map<std::string, double>& vars) : s_(text), vars_(vars) {}

    double parse() {
        const double v = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw InputError("expression \"" + std::string(s_) + "\": " + what + " at position " + std::to_string(pos_ + 1));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double sum() {
        double v = product();
        for (;;) {
            if (eat('+')) v += product();
            else if (eat('-')) v -= product();
            else return v;
        }
    }

    double product() {
        double v = unary();
        for (;;) {
            if (eat('*')) v *= unary();
            else if (eat('/')) v /= unary();
            else return v;
        }
    }

    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }

    // right-associative; binds tighter than unary minus on its left operand only
    double power() {
        const double base = atom();
        if (eat('^')) return std::pow(base, unary());
        return base;
    }

    double atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (eat('(')) {
            const double v = sum();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    double number() {
        const std::string rest(s_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        return v;
    }

    double name() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string id(s_.substr(start, pos_ - start));
        if (eat('(')) {
            const double arg = sum();
            if (!eat(')')) fail("expected ')' after argument of " + id);
            if (id == "sqrt") return std::sqrt(arg);
            if (id == "abs") return std::abs(arg);
            if (id == "exp") return std::exp(arg);
            if (id == "log") return std::log(arg);
            if (id == "sin") return std::sin(arg);
            if (id == "cos") return std::cos(arg);
            if (id == "tan") return std::tan(arg);
            pos_ = start;
            fail("unknown function '" + id + "'");
        }
        if (auto it = vars_.find(id); it != vars_.end()) return it->second;
        if (id == "pi") return std::numbers::pi;
        pos_ = start;
        fail("unknown parameter '" + id + "'");
    }

    std::string_view s_;
    const std::map<std::string, double>& vars_;
    std::size_t pos_ = 0;
};

}  // namespace

double evaluate_expression(std::string_view text, const std::map<std::string, double>& vars) {
    return Parser(text, vars).parse();
}

}  // namespace delaystab
