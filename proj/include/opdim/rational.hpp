#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "opdim/error.hpp"

namespace opdim {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "7", "-3", "3/2" or "-1/4". Denominators must be nonzero.
inline Rational parse_rational(std::string_view text) {
    auto digits_ok = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!digits_ok(num) || !digits_ok(den) || den[0] == '-' || den[0] == '+')
        throw InputError("malformed rational literal '" + std::string(text) + "'");
    BigInt n(std::string(num[0] == '+' ? num.substr(1) : num));
    BigInt d{std::string(den)};
    if (d == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    return Rational(n, d);
}

inline std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

} // namespace opdim
