#pragma once

// Expression trees over lagged output/input variables. The tree shape is the
// evaluation order: two trees that are algebraically equal but shaped
// differently are different "extensions" of the same function and, in
// binary64, generally produce different values.

#include <lbe/error.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

static_assert(std::numeric_limits<double>::is_iec559, "binary64 doubles required");

#if defined(__FAST_MATH__)
#error "lbe requires strict IEEE-754 semantics; do not build with -ffast-math"
#endif

namespace lbe {

enum class Stream { y, u };

enum class BinaryOperator { add, sub, mul, div, pow };

enum class Function { sin, cos };

// How `x^k` is evaluated. `libm` calls std::pow with a floating exponent, so
// x^3 and x*x*x remain distinct extensions. `repeated` folds x^k into
// left-associated multiplication.
enum class PowMode { libm, repeated };

inline std::string_view to_string(PowMode mode) {
    return mode == PowMode::libm ? "libm" : "repeated";
}

inline std::optional<PowMode> parse_pow_mode(std::string_view text) {
    if (text == "libm") {
        return PowMode::libm;
    }
    if (text == "repeated") {
        return PowMode::repeated;
    }
    return std::nullopt;
}

struct Variable {
    Stream stream;
    int lag;

    friend auto operator<=>(const Variable&, const Variable&) = default;
};

struct Constant {
    std::string literal; // exact decimal text as written
    double value;        // nearest binary64

    friend bool operator==(const Constant& a, const Constant& b) { return a.literal == b.literal; }
};

struct Node;

class Expression {
public:
    explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    const Node& node() const { return *node_; }

    friend bool operator==(const Expression& a, const Expression& b);

private:
    std::shared_ptr<const Node> node_;
};

struct Binary {
    BinaryOperator op;
    Expression lhs;
    Expression rhs;
};

struct Negate {
    Expression operand;
};

struct Call {
    Function fn;
    Expression arg;
};

struct Node {
    std::variant<Constant, Variable, Binary, Negate, Call> data;
};

inline bool operator==(const Expression& a, const Expression& b) {
    if (a.node_ == b.node_) {
        return true;
    }
    const auto& x = a.node().data;
    const auto& y = b.node().data;
    if (x.index() != y.index()) {
        return false;
    }
    return std::visit(
        [&](const auto& lhs) -> bool {
            using T = std::decay_t<decltype(lhs)>;
            const auto& rhs = std::get<T>(y);
            if constexpr (std::is_same_v<T, Binary>) {
                return lhs.op == rhs.op && lhs.lhs == rhs.lhs && lhs.rhs == rhs.rhs;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return lhs.operand == rhs.operand;
            } else if constexpr (std::is_same_v<T, Call>) {
                return lhs.fn == rhs.fn && lhs.arg == rhs.arg;
            } else {
                return lhs == rhs;
            }
        },
        x);
}

// ---------------------------------------------------------------------------
// Construction

namespace detail {

inline Expression make(auto&& payload) {
    return Expression(std::make_shared<const Node>(Node{std::forward<decltype(payload)>(payload)}));
}

// Parses an unsigned decimal literal: digits [. digits] [e [+-] digits], or
// .digits. Returns the number of characters consumed, 0 if none.
inline std::size_t scan_decimal(std::string_view text) {
    std::size_t i = 0;
    auto digits = [&] {
        const auto start = i;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
            ++i;
        }
        return i - start;
    };
    auto mantissa = digits();
    if (i < text.size() && text[i] == '.') {
        ++i;
        mantissa += digits();
    }
    if (mantissa == 0) {
        return 0;
    }
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        auto save = i++;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
            ++i;
        }
        if (digits() == 0) {
            i = save;
        }
    }
    return i;
}

inline bool is_integer_literal(std::string_view literal) {
    if (literal.empty()) {
        return false;
    }
    for (char c : literal) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

} // namespace detail

// Throws std::invalid_argument if `literal` is not an unsigned decimal literal.
inline Expression constant(std::string literal) {
    if (literal.empty() || detail::scan_decimal(literal) != literal.size()) {
        throw std::invalid_argument("not a decimal literal: '" + literal + "'");
    }
    double value = 0.0;
    const auto* first = literal.data();
    const auto* last = first + literal.size();
    // from_chars rejects a leading '.', so give it "0." in that case
    std::string padded;
    if (literal.front() == '.') {
        padded = "0" + literal;
        first = padded.data();
        last = first + padded.size();
    }
    const auto result = std::from_chars(first, last, value);
    if (result.ec == std::errc::result_out_of_range) {
        throw std::invalid_argument("decimal literal out of binary64 range: '" + literal + "'");
    }
    return detail::make(Constant{std::move(literal), value});
}

inline Expression variable(Stream stream, int lag) {
    if (stream == Stream::y && lag < 1) {
        throw std::invalid_argument("output lag must be >= 1, got " + std::to_string(lag));
    }
    if (lag < 0) {
        throw std::invalid_argument("input lag must be >= 0, got " + std::to_string(lag));
    }
    return detail::make(Variable{stream, lag});
}

inline Expression binary(BinaryOperator op, Expression lhs, Expression rhs) {
    if (op == BinaryOperator::pow) {
        const auto* c = std::get_if<Constant>(&rhs.node().data);
        if (c == nullptr || !detail::is_integer_literal(c->literal)) {
            throw std::invalid_argument("exponent must be a nonnegative integer constant");
        }
    }
    return detail::make(Binary{op, std::move(lhs), std::move(rhs)});
}

inline Expression add(Expression a, Expression b) { return binary(BinaryOperator::add, std::move(a), std::move(b)); }
inline Expression sub(Expression a, Expression b) { return binary(BinaryOperator::sub, std::move(a), std::move(b)); }
inline Expression mul(Expression a, Expression b) { return binary(BinaryOperator::mul, std::move(a), std::move(b)); }
inline Expression div(Expression a, Expression b) { return binary(BinaryOperator::div, std::move(a), std::move(b)); }

inline Expression pow(Expression base, unsigned exponent) {
    return binary(BinaryOperator::pow, std::move(base), constant(std::to_string(exponent)));
}

inline Expression negate(Expression operand) { return detail::make(Negate{std::move(operand)}); }

inline Expression call(Function fn, Expression arg) { return detail::make(Call{fn, std::move(arg)}); }

// Exponent of a pow node. The constructor guarantees it is a digit string.
inline unsigned exponent_of(const Binary& node) {
    const auto& literal = std::get<Constant>(node.rhs.node().data).literal;
    unsigned value = 0;
    const auto result = std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (result.ec != std::errc{}) {
        throw std::invalid_argument("exponent out of range: " + literal);
    }
    return value;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr    := term   (('+' | '-') term)*
//   term    := unary  (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' integer)*
//   primary := number | var | fn '(' expr ')' | '(' expr ')'
//   var     := ('y' | 'u') '(' 'n' [ '-' integer ] ')'
//   fn      := 'sin' | 'cos'

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expression parse() {
        auto e = expr();
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { fail_at(message, pos_); }

    [[noreturn]] static void fail_at(const std::string& message, std::size_t position) {
        throw parse_error(message, position);
    }

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    Expression expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = binary(BinaryOperator::add, std::move(lhs), term());
            } else if (accept('-')) {
                lhs = binary(BinaryOperator::sub, std::move(lhs), term());
            } else {
                return lhs;
            }
        }
    }

    Expression term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = binary(BinaryOperator::mul, std::move(lhs), unary());
            } else if (accept('/')) {
                lhs = binary(BinaryOperator::div, std::move(lhs), unary());
            } else {
                return lhs;
            }
        }
    }

    Expression unary() {
        if (accept('-')) {
            return negate(unary());
        }
        return power();
    }

    Expression power() {
        auto base = primary();
        while (accept('^')) {
            skip_space();
            const auto at = pos_;
            if (pos_ < text_.size() && text_[pos_] == '-') {
                fail("negative exponent");
            }
            const auto length = scan_decimal(text_.substr(pos_));
            if (length == 0) {
                fail("expected integer exponent");
            }
            const auto literal = std::string(text_.substr(pos_, length));
            if (!is_integer_literal(literal)) {
                fail_at("non-integer exponent '" + literal + "'", at);
            }
            pos_ += length;
            unsigned value = 0;
            if (std::from_chars(literal.data(), literal.data() + literal.size(), value).ec != std::errc{}) {
                fail_at("exponent out of range", at);
            }
            base = binary(BinaryOperator::pow, std::move(base), constant(literal));
        }
        return base;
    }

    Expression primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = expr();
            expect(')');
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            const auto length = scan_decimal(text_.substr(pos_));
            if (length == 0) {
                fail("malformed number");
            }
            auto literal = std::string(text_.substr(pos_, length));
            const auto at = pos_;
            pos_ += length;
            try {
                return constant(std::move(literal));
            } catch (const std::invalid_argument& e) {
                fail_at(e.what(), at);
            }
        }
        if (std::isalpha(static_cast<unsigned char>(c)) != 0) {
            const auto start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0) {
                ++pos_;
            }
            const auto name = text_.substr(start, pos_ - start);
            if (name == "y" || name == "u") {
                return lagged(name == "y" ? Stream::y : Stream::u, start);
            }
            if (name == "sin" || name == "cos") {
                expect('(');
                auto arg = expr();
                expect(')');
                return call(name == "sin" ? Function::sin : Function::cos, std::move(arg));
            }
            fail_at("unknown identifier '" + std::string(name) + "'", start);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expression lagged(Stream stream, std::size_t start) {
        expect('(');
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != 'n') {
            fail("expected 'n'");
        }
        ++pos_;
        int lag = 0;
        if (accept('-')) {
            skip_space();
            const auto at = pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                ++pos_;
            }
            if (at == pos_ ||
                std::from_chars(text_.data() + at, text_.data() + pos_, lag).ec != std::errc{}) {
                fail_at("expected integer lag", at);
            }
        } else if (accept('+')) {
            fail("lags must refer to past steps");
        }
        expect(')');
        if (stream == Stream::y && lag < 1) {
            fail_at("output variable y must have lag >= 1", start);
        }
        return variable(stream, lag);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expression parse_expression(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Formatting

namespace detail {

constexpr int precedence_additive = 1;
constexpr int precedence_multiplicative = 2;
constexpr int precedence_unary = 3;
constexpr int precedence_power = 4;
constexpr int precedence_atom = 5;

inline int precedence(const Expression& e) {
    if (const auto* b = std::get_if<Binary>(&e.node().data)) {
        switch (b->op) {
        case BinaryOperator::add:
        case BinaryOperator::sub: return precedence_additive;
        case BinaryOperator::mul:
        case BinaryOperator::div: return precedence_multiplicative;
        case BinaryOperator::pow: return precedence_power;
        }
    }
    if (std::holds_alternative<Negate>(e.node().data)) {
        return precedence_unary;
    }
    return precedence_atom;
}

inline void format_into(const Expression& e, std::string& out);

inline void format_operand(const Expression& e, bool parens, std::string& out) {
    if (parens) {
        out += '(';
    }
    format_into(e, out);
    if (parens) {
        out += ')';
    }
}

inline void format_into(const Expression& e, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Constant>) {
                out += n.literal;
            } else if constexpr (std::is_same_v<T, Variable>) {
                out += n.stream == Stream::y ? "y(n" : "u(n";
                if (n.lag != 0) {
                    out += '-';
                    out += std::to_string(n.lag);
                }
                out += ')';
            } else if constexpr (std::is_same_v<T, Negate>) {
                out += '-';
                format_operand(n.operand, precedence(n.operand) < precedence_unary, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                out += n.fn == Function::sin ? "sin(" : "cos(";
                format_into(n.arg, out);
                out += ')';
            } else {
                const int mine = precedence(e);
                // left-associative: equal precedence on the right needs parentheses
                format_operand(n.lhs, precedence(n.lhs) < mine, out);
                switch (n.op) {
                case BinaryOperator::add: out += " + "; break;
                case BinaryOperator::sub: out += " - "; break;
                case BinaryOperator::mul: out += '*'; break;
                case BinaryOperator::div: out += '/'; break;
                case BinaryOperator::pow: out += '^'; break;
                }
                format_operand(n.rhs, precedence(n.rhs) <= mine, out);
            }
        },
        e.node().data);
}

} // namespace detail

inline std::string format_expression(const Expression& e) {
    std::string out;
    detail::format_into(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Inspection

inline void collect_variables(const Expression& e, std::vector<Variable>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Variable>) {
                out.push_back(n);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect_variables(n.lhs, out);
                collect_variables(n.rhs, out);
            } else if constexpr (std::is_same_v<T, Negate>) {
                collect_variables(n.operand, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                collect_variables(n.arg, out);
            }
        },
        e.node().data);
}

// Largest lag of `stream` referenced by `e`; 0 when absent.
inline int max_lag(const Expression& e, Stream stream) {
    std::vector<Variable> vars;
    collect_variables(e, vars);
    int lag = 0;
    for (const auto& v : vars) {
        if (v.stream == stream && v.lag > lag) {
            lag = v.lag;
        }
    }
    return lag;
}

inline bool contains_power(const Expression& e) {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Binary>) {
                return n.op == BinaryOperator::pow || contains_power(n.lhs) || contains_power(n.rhs);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return contains_power(n.operand);
            } else if constexpr (std::is_same_v<T, Call>) {
                return contains_power(n.arg);
            } else {
                return false;
            }
        },
        e.node().data);
}

// ---------------------------------------------------------------------------
// Strict evaluation
//
// Every node is one IEEE-754 binary64 operation, applied in tree order with
// round-to-nearest. The build must not contract a*b+c into an FMA or
// reassociate; the lbe CMake target adds -ffp-contract=off for this.

// Explicit (stream, lag) -> value bindings.
class LagAssignment {
public:
    LagAssignment() = default;
    LagAssignment(std::initializer_list<std::pair<Variable, double>> values) : values_(values) {}

    LagAssignment& set(Variable v, double value) {
        for (auto& [key, stored] : values_) {
            if (key == v) {
                stored = value;
                return *this;
            }
        }
        values_.emplace_back(v, value);
        return *this;
    }

    double operator()(const Variable& v) const {
        for (const auto& [key, value] : values_) {
            if (key == v) {
                return value;
            }
        }
        throw evaluation_error("no value bound for " + format_expression(variable(v.stream, v.lag)));
    }

private:
    std::vector<std::pair<Variable, double>> values_;
};

template <class Env>
concept VariableEnvironment = requires(const Env& env, const Variable& v) {
    { env(v) } -> std::convertible_to<double>;
};

// Returns NaN/Inf as computed; callers treat non-finite results as divergence.
// Throws evaluation_error on division by zero.
template <VariableEnvironment Env>
double evaluate_strict(const Expression& e, const Env& env, PowMode mode = PowMode::libm) {
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, Variable>) {
                return static_cast<double>(env(n));
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -evaluate_strict(n.operand, env, mode);
            } else if constexpr (std::is_same_v<T, Call>) {
                const double arg = evaluate_strict(n.arg, env, mode);
                return n.fn == Function::sin ? std::sin(arg) : std::cos(arg);
            } else {
                const double lhs = evaluate_strict(n.lhs, env, mode);
                if (n.op == BinaryOperator::pow) {
                    const unsigned k = exponent_of(n);
                    if (mode == PowMode::libm) {
                        return std::pow(lhs, static_cast<double>(k));
                    }
                    if (k == 0) {
                        return 1.0;
                    }
                    double acc = lhs;
                    for (unsigned i = 1; i < k; ++i) {
                        acc = acc * lhs;
                    }
                    return acc;
                }
                const double rhs = evaluate_strict(n.rhs, env, mode);
                switch (n.op) {
                case BinaryOperator::add: return lhs + rhs;
                case BinaryOperator::sub: return lhs - rhs;
                case BinaryOperator::mul: return lhs * rhs;
                case BinaryOperator::div:
                    if (rhs == 0.0) {
                        throw evaluation_error("division by zero");
                    }
                    return lhs / rhs;
                case BinaryOperator::pow: break;
                }
                return std::numeric_limits<double>::quiet_NaN();
            }
        },
        e.node().data);
}

} // namespace lbe
