#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace relsv {

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator. Thin value wrapper over mpq_class.
class ExactScalar {
public:
    ExactScalar() = default;
    ExactScalar(long v) : q_(v) {}
    ExactScalar(int v) : q_(v) {}
    ExactScalar(const mpz_class& v) : q_(v) {}
    explicit ExactScalar(const mpq_class& v) : q_(v) { q_.canonicalize(); }

    ExactScalar(long num, long den)
    {
        if (den == 0) {
            throw std::domain_error("ExactScalar: zero denominator");
        }
        q_ = mpq_class(mpz_class(num), mpz_class(den));
        q_.canonicalize();
    }

    ExactScalar(const mpz_class& num, const mpz_class& den)
    {
        if (den == 0) {
            throw std::domain_error("ExactScalar: zero denominator");
        }
        q_ = mpq_class(num, den);
        q_.canonicalize();
    }

    /// Parses "p/q", "p" or "-p/q".
    static ExactScalar parse(std::string_view text)
    {
        std::string s(text);
        mpq_class q;
        if (s.empty() || q.set_str(s, 10) != 0) {
            throw std::invalid_argument("ExactScalar: cannot parse '" + s + "'");
        }
        if (q.get_den() == 0) {
            throw std::domain_error("ExactScalar: zero denominator");
        }
        q.canonicalize();
        return ExactScalar(q);
    }

    const mpq_class& get() const noexcept { return q_; }
    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }

    bool is_zero() const noexcept { return sgn(q_) == 0; }
    bool is_integer() const { return q_.get_den() == 1; }
    int sign() const noexcept { return sgn(q_); }

    /// Always "p/q", integers included ("5/1").
    std::string str() const { return q_.get_num().get_str() + "/" + q_.get_den().get_str(); }

    /// "p/q", or "p" when the denominator is one. Used for human-readable output.
    std::string pretty() const { return is_integer() ? q_.get_num().get_str() : str(); }

    ExactScalar& operator+=(const ExactScalar& o) { q_ += o.q_; return *this; }
    ExactScalar& operator-=(const ExactScalar& o) { q_ -= o.q_; return *this; }
    ExactScalar& operator*=(const ExactScalar& o) { q_ *= o.q_; return *this; }
    ExactScalar& operator/=(const ExactScalar& o)
    {
        if (o.is_zero()) {
            throw std::domain_error("ExactScalar: division by zero");
        }
        q_ /= o.q_;
        return *this;
    }

    friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { return a += b; }
    friend ExactScalar operator-(ExactScalar a, const ExactScalar& b) { return a -= b; }
    friend ExactScalar operator*(ExactScalar a, const ExactScalar& b) { return a *= b; }
    friend ExactScalar operator/(ExactScalar a, const ExactScalar& b) { return a /= b; }
    friend ExactScalar operator-(const ExactScalar& a) { return ExactScalar(mpq_class(-a.q_)); }

    friend bool operator==(const ExactScalar& a, const ExactScalar& b) { return a.q_ == b.q_; }
    friend std::strong_ordering operator<=>(const ExactScalar& a, const ExactScalar& b)
    {
        const int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const ExactScalar& s) { return os << s.str(); }

private:
    mpq_class q_;
};

/// base^e for any integer e; base must be nonzero when e < 0.
inline ExactScalar pow(const ExactScalar& base, long e)
{
    if (e < 0) {
        return ExactScalar(1) / pow(base, -e);
    }
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get().get_num_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(den.get_mpz_t(), base.get().get_den_mpz_t(), static_cast<unsigned long>(e));
    return ExactScalar(num, den);
}

inline mpz_class factorial(unsigned long n)
{
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return f;
}

inline mpz_class binomial(unsigned long n, unsigned long k)
{
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return b;
}

/// Exact n-th root of a rational, if it is rational. For even n the
/// positive root is returned.
inline std::optional<ExactScalar> exact_root(const ExactScalar& x, unsigned long n)
{
    if (n == 0) {
        throw std::domain_error("exact_root: n == 0");
    }
    if (n == 1) {
        return x;
    }
    const bool negative = x.sign() < 0;
    if (negative && n % 2 == 0) {
        return std::nullopt;
    }
    mpz_class num = x.numerator();
    if (negative) {
        num = -num;
    }
    mpz_class den = x.denominator();
    mpz_class rn, rd;
    if (mpz_root(rn.get_mpz_t(), num.get_mpz_t(), n) == 0 || mpz_root(rd.get_mpz_t(), den.get_mpz_t(), n) == 0) {
        return std::nullopt;
    }
    return ExactScalar(negative ? mpz_class(-rn) : rn, rd);
}

} // namespace relsv
