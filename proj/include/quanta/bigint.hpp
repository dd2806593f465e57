#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace quanta {

// Arbitrary-precision signed integer. Sign-magnitude, base 2^32 limbs,
// little-endian, no leading zero limbs (zero == empty magnitude, non-negative).
// Division truncates toward zero; remainder takes the dividend's sign.
class BigInt {
public:
    BigInt() = default;
    BigInt(long long v);

    // Parses an optional sign followed by decimal digits. Throws
    // std::invalid_argument on anything else (including empty input).
    static BigInt parse(std::string_view text);

    std::string str() const;

    bool is_zero() const { return mag_.empty(); }
    bool is_negative() const { return neg_; }
    bool is_even() const { return mag_.empty() || (mag_[0] & 1u) == 0; }

    // <0, ==0, >0 comparison with rhs.
    int compare(const BigInt& rhs) const;

    BigInt operator-() const;
    BigInt operator+(const BigInt& rhs) const;
    BigInt operator-(const BigInt& rhs) const;
    BigInt operator*(const BigInt& rhs) const;
    // Throw std::domain_error on division by zero.
    BigInt operator/(const BigInt& rhs) const;
    BigInt operator%(const BigInt& rhs) const;

    bool operator==(const BigInt& rhs) const { return compare(rhs) == 0; }
    bool operator!=(const BigInt& rhs) const { return compare(rhs) != 0; }
    bool operator<(const BigInt& rhs) const { return compare(rhs) < 0; }
    bool operator<=(const BigInt& rhs) const { return compare(rhs) <= 0; }
    bool operator>(const BigInt& rhs) const { return compare(rhs) > 0; }
    bool operator>=(const BigInt& rhs) const { return compare(rhs) >= 0; }

    // True when the value fits in int64_t.
    bool fits_int64() const;
    // Value as int64_t; throws std::range_error when it does not fit.
    int64_t to_int64() const;

    size_t limb_count() const { return mag_.size(); }

private:
    static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    // Requires |a| >= |b|.
    static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static std::vector<uint32_t> mul_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static void divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                           std::vector<uint32_t>& q, std::vector<uint32_t>& r);
    static void trim(std::vector<uint32_t>& m);
    static uint32_t divmod_small(std::vector<uint32_t>& m, uint32_t d);  // returns remainder
    static void mul_small_add(std::vector<uint32_t>& m, uint32_t mul, uint32_t add);

    void normalize_sign();

    bool neg_ = false;
    std::vector<uint32_t> mag_;
};

}  // namespace quanta
