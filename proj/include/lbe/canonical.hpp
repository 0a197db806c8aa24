#pragma once

// Exact expansion of polynomial expressions into a canonical sum of
// monomials with rational coefficients. Two extensions are the same function
// iff their canonical forms compare equal.

#include <lbe/error.hpp>
#include <lbe/expr.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lbe {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

struct Factor {
    Variable variable;
    unsigned power;

    friend auto operator<=>(const Factor&, const Factor&) = default;
};

// Factors sorted by variable, one entry per variable, powers >= 1. The empty
// monomial is the constant term.
class Monomial {
public:
    Monomial() = default;

    static Monomial of(Variable v, unsigned power = 1) {
        Monomial m;
        if (power > 0) {
            m.factors_.push_back({v, power});
        }
        return m;
    }

    const std::vector<Factor>& factors() const { return factors_; }

    unsigned degree() const {
        unsigned d = 0;
        for (const auto& f : factors_) {
            d += f.power;
        }
        return d;
    }

    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial out;
        auto i = a.factors_.begin();
        auto j = b.factors_.begin();
        while (i != a.factors_.end() || j != b.factors_.end()) {
            if (j == b.factors_.end() || (i != a.factors_.end() && i->variable < j->variable)) {
                out.factors_.push_back(*i++);
            } else if (i == a.factors_.end() || j->variable < i->variable) {
                out.factors_.push_back(*j++);
            } else {
                out.factors_.push_back({i->variable, i->power + j->power});
                ++i;
                ++j;
            }
        }
        return out;
    }

    friend auto operator<=>(const Monomial&, const Monomial&) = default;

    std::string to_string() const {
        std::string out;
        for (const auto& f : factors_) {
            if (!out.empty()) {
                out += '*';
            }
            out += format_expression(variable(f.variable.stream, f.variable.lag));
            if (f.power > 1) {
                out += '^' + std::to_string(f.power);
            }
        }
        return out;
    }

private:
    std::vector<Factor> factors_;
};

class CanonicalPolynomial {
public:
    using Terms = std::map<Monomial, Rational>;

    CanonicalPolynomial() = default;

    static CanonicalPolynomial constant(const Rational& c) {
        CanonicalPolynomial p;
        p.accumulate(Monomial{}, c);
        return p;
    }

    static CanonicalPolynomial monomial(const Monomial& m, const Rational& c = 1) {
        CanonicalPolynomial p;
        p.accumulate(m, c);
        return p;
    }

    const Terms& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    Rational coefficient(const Monomial& m) const {
        const auto it = terms_.find(m);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    friend CanonicalPolynomial operator+(CanonicalPolynomial a, const CanonicalPolynomial& b) {
        for (const auto& [m, c] : b.terms_) {
            a.accumulate(m, c);
        }
        return a;
    }

    friend CanonicalPolynomial operator-(CanonicalPolynomial a, const CanonicalPolynomial& b) {
        for (const auto& [m, c] : b.terms_) {
            a.accumulate(m, -c);
        }
        return a;
    }

    friend CanonicalPolynomial operator-(CanonicalPolynomial a) {
        for (auto& [m, c] : a.terms_) {
            c = -c;
        }
        return a;
    }

    friend CanonicalPolynomial operator*(const CanonicalPolynomial& a, const CanonicalPolynomial& b) {
        CanonicalPolynomial out;
        for (const auto& [ma, ca] : a.terms_) {
            for (const auto& [mb, cb] : b.terms_) {
                out.accumulate(ma * mb, ca * cb);
            }
        }
        return out;
    }

    CanonicalPolynomial pow(unsigned k) const {
        auto result = constant(1);
        auto base = *this;
        while (k > 0) {
            if ((k & 1U) != 0) {
                result = result * base;
            }
            k >>= 1U;
            if (k > 0) {
                base = base * base;
            }
        }
        return result;
    }

    friend bool operator==(const CanonicalPolynomial& a, const CanonicalPolynomial& b) {
        return a.terms_ == b.terms_;
    }

    // Human-readable listing, e.g. "6717/2500*y(n-1) - 1231/5000*y(n-1)^3".
    std::string to_string() const {
        if (terms_.empty()) {
            return "0";
        }
        std::string out;
        for (const auto& [m, c] : terms_) {
            const bool negative = c < 0;
            const Rational magnitude = negative ? Rational(-c) : c;
            if (out.empty()) {
                out += negative ? "-" : "";
            } else {
                out += negative ? " - " : " + ";
            }
            out += magnitude.str();
            if (!m.factors().empty()) {
                out += '*' + m.to_string();
            }
        }
        return out;
    }

private:
    void accumulate(const Monomial& m, const Rational& c) {
        if (c == 0) {
            return;
        }
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) {
                terms_.erase(it);
            }
        }
    }

    Terms terms_;
};

// Exact value of an unsigned decimal literal such as "2.6868" or "1.5e-3".
inline Rational decimal_to_rational(std::string_view literal) {
    std::string digits;
    long long scale = 0;
    std::size_t i = 0;
    bool fraction = false;
    for (; i < literal.size(); ++i) {
        const char c = literal[i];
        if (c >= '0' && c <= '9') {
            digits += c;
            if (fraction) {
                --scale;
            }
        } else if (c == '.' && !fraction) {
            fraction = true;
        } else {
            break;
        }
    }
    if (i < literal.size()) {
        if (literal[i] != 'e' && literal[i] != 'E') {
            throw std::invalid_argument("not a decimal literal: " + std::string(literal));
        }
        const auto exponent = std::stoll(std::string(literal.substr(i + 1)));
        scale += exponent;
    }
    if (digits.empty()) {
        throw std::invalid_argument("not a decimal literal: " + std::string(literal));
    }
    const auto nonzero = digits.find_first_not_of('0');
    const BigInt mantissa(nonzero == std::string::npos ? std::string("0") : digits.substr(nonzero));
    const BigInt ten_power = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
    return scale < 0 ? Rational(mantissa, ten_power) : Rational(mantissa * ten_power);
}

// Throws unsupported_form_error for division, sin and cos.
inline CanonicalPolynomial expand_canonical(const Expression& e) {
    return std::visit(
        [&](const auto& n) -> CanonicalPolynomial {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return CanonicalPolynomial::constant(decimal_to_rational(n.literal));
            } else if constexpr (std::is_same_v<T, Variable>) {
                return CanonicalPolynomial::monomial(Monomial::of(n));
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -expand_canonical(n.operand);
            } else if constexpr (std::is_same_v<T, Call>) {
                throw unsupported_form_error("function call is outside the polynomial subset: " +
                                             format_expression(e));
            } else {
                switch (n.op) {
                case BinaryOperator::add: return expand_canonical(n.lhs) + expand_canonical(n.rhs);
                case BinaryOperator::sub: return expand_canonical(n.lhs) - expand_canonical(n.rhs);
                case BinaryOperator::mul: return expand_canonical(n.lhs) * expand_canonical(n.rhs);
                case BinaryOperator::pow: return expand_canonical(n.lhs).pow(exponent_of(n));
                case BinaryOperator::div: break;
                }
                throw unsupported_form_error("division is outside the polynomial subset: " +
                                             format_expression(e));
            }
        },
        e.node().data);
}

inline bool check_equivalence(const Expression& a, const Expression& b) {
    return expand_canonical(a) == expand_canonical(b);
}

} // namespace lbe
