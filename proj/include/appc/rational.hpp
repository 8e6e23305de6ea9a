#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace appc {

/// Exact arbitrary-precision rational. All planning quantities (probabilities,
/// expected penalties, APPC values) are carried in this type.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1)
{
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Parses "3/10", "7", "0.35", "-1.5e-2". Decimal forms are converted exactly.
inline Rational parse_rational(std::string_view text)
{
    auto fail = [&]() -> Rational {
        throw std::invalid_argument("not a rational number: '" + std::string(text) + "'");
    };
    if (text.empty())
        return fail();

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::string num(text.substr(0, slash));
        std::string den(text.substr(slash + 1));
        mpz_class n, d;
        if (n.set_str(num, 10) != 0 || d.set_str(den, 10) != 0 || d == 0)
            return fail();
        Rational q(n, d);
        q.canonicalize();
        return q;
    }

    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    std::string digits;
    long scale = 0;
    bool seen_digit = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        digits.push_back(text[i++]);
        seen_digit = true;
    }
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            digits.push_back(text[i++]);
            ++scale;
            seen_digit = true;
        }
    }
    if (!seen_digit)
        return fail();
    long exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool exp_negative = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
            exp_negative = text[i] == '-';
            ++i;
        }
        if (i == text.size())
            return fail();
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            exponent = exponent * 10 + (text[i++] - '0');
            if (exponent > 4096)
                return fail();
        }
        if (exp_negative)
            exponent = -exponent;
    }
    if (i != text.size())
        return fail();

    mpz_class num(digits, 10);
    mpz_class den = 1;
    long shift = exponent - scale;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    if (shift < 0)
        den = pow10;
    else
        num *= pow10;
    if (negative)
        num = -num;
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Decimal rendering with `digits` fractional digits, rounding half away from
/// zero. Exact, so output is identical on every platform.
inline std::string to_decimal(const Rational& q, int digits = 9)
{
    mpz_class num = abs(q.get_num());
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    num *= scale;
    mpz_class quot, rem;
    mpz_fdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), q.get_den_mpz_t());
    if (2 * rem >= q.get_den())
        ++quot;

    std::string body = quot.get_str();
    if (digits > 0) {
        if (body.size() <= static_cast<std::size_t>(digits))
            body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
        body.insert(body.size() - static_cast<std::size_t>(digits), ".");
    }
    if (q < 0 && quot != 0)
        body.insert(0, "-");
    return body;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

} // namespace appc
