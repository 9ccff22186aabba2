#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "relsv/ratcore/scalar.hpp"

namespace relsv {

/// Laurent polynomial in the equivariant parameter t over ExactScalar.
/// Zero coefficients are never stored.
class EquivariantScalar {
public:
    using exponent_type = std::int64_t;
    using container_type = std::map<exponent_type, ExactScalar>;

    EquivariantScalar() = default;
    EquivariantScalar(const ExactScalar& c) { set(0, c); }
    EquivariantScalar(long c) : EquivariantScalar(ExactScalar(c)) {}

    /// c * t^e
    static EquivariantScalar monomial(const ExactScalar& c, exponent_type e)
    {
        EquivariantScalar x;
        x.set(e, c);
        return x;
    }

    static EquivariantScalar t_power(exponent_type e) { return monomial(ExactScalar(1), e); }

    const container_type& coefficients() const noexcept { return coeffs_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    bool is_monomial() const noexcept { return coeffs_.size() == 1; }

    ExactScalar coefficient(exponent_type e) const
    {
        auto it = coeffs_.find(e);
        return it == coeffs_.end() ? ExactScalar(0) : it->second;
    }

    std::optional<exponent_type> min_exponent() const
    {
        if (coeffs_.empty()) {
            return std::nullopt;
        }
        return coeffs_.begin()->first;
    }

    /// Inverse of a unit c*t^e; nullopt for anything else.
    std::optional<EquivariantScalar> inverse() const
    {
        if (!is_monomial()) {
            return std::nullopt;
        }
        const auto& [e, c] = *coeffs_.begin();
        return monomial(ExactScalar(1) / c, -e);
    }

    EquivariantScalar& operator+=(const EquivariantScalar& o)
    {
        for (const auto& [e, c] : o.coeffs_) {
            add(e, c);
        }
        return *this;
    }

    EquivariantScalar& operator-=(const EquivariantScalar& o)
    {
        for (const auto& [e, c] : o.coeffs_) {
            add(e, -c);
        }
        return *this;
    }

    EquivariantScalar& operator*=(const ExactScalar& s)
    {
        if (s.is_zero()) {
            coeffs_.clear();
            return *this;
        }
        for (auto& [e, c] : coeffs_) {
            c *= s;
        }
        return *this;
    }

    friend EquivariantScalar operator*(const EquivariantScalar& a, const EquivariantScalar& b)
    {
        EquivariantScalar out;
        for (const auto& [ea, ca] : a.coeffs_) {
            for (const auto& [eb, cb] : b.coeffs_) {
                out.add(ea + eb, ca * cb);
            }
        }
        return out;
    }

    EquivariantScalar& operator*=(const EquivariantScalar& o) { return *this = *this * o; }

    friend EquivariantScalar operator+(EquivariantScalar a, const EquivariantScalar& b) { return a += b; }
    friend EquivariantScalar operator-(EquivariantScalar a, const EquivariantScalar& b) { return a -= b; }
    friend EquivariantScalar operator-(EquivariantScalar a)
    {
        a *= ExactScalar(-1);
        return a;
    }

    friend bool operator==(const EquivariantScalar&, const EquivariantScalar&) = default;

    /// Human-readable, e.g. "3/2*t^-1 + 1/1".
    std::string str() const
    {
        if (coeffs_.empty()) {
            return "0";
        }
        std::ostringstream os;
        bool first = true;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            if (!first) {
                os << " + ";
            }
            first = false;
            os << it->second.pretty();
            if (it->first != 0) {
                os << "*t^" << it->first;
            }
        }
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const EquivariantScalar& x) { return os << x.str(); }

private:
    void set(exponent_type e, const ExactScalar& c)
    {
        if (c.is_zero()) {
            coeffs_.erase(e);
        } else {
            coeffs_[e] = c;
        }
    }

    void add(exponent_type e, const ExactScalar& c)
    {
        if (c.is_zero()) {
            return;
        }
        auto [it, inserted] = coeffs_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) {
                coeffs_.erase(it);
            }
        }
    }

    container_type coeffs_;
};

} // namespace relsv

namespace relsv {

/// x^e. Negative e requires x to be a unit (single monomial).
inline EquivariantScalar pow(const EquivariantScalar& x, long e)
{
    if (e < 0) {
        auto inv = x.inverse();
        if (!inv) {
            throw std::domain_error("pow: negative power of a non-unit Laurent polynomial");
        }
        return pow(*inv, -e);
    }
    if (x.is_monomial()) {
        const auto& [k, c] = *x.coefficients().begin();
        return EquivariantScalar::monomial(pow(c, e), k * e);
    }
    EquivariantScalar out(1L);
    EquivariantScalar base = x;
    for (long n = e; n > 0; n >>= 1) {
        if (n & 1) {
            out *= base;
        }
        base *= base;
    }
    return out;
}

} // namespace relsv
