#include "quanta/bigint.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace quanta {

namespace {
constexpr uint64_t kBase = 1ull << 32;
}

BigInt::BigInt(long long v) {
    neg_ = v < 0;
    // Avoid UB on LLONG_MIN by widening through unsigned.
    uint64_t u = neg_ ? ~static_cast<uint64_t>(v) + 1 : static_cast<uint64_t>(v);
    while (u != 0) {
        mag_.push_back(static_cast<uint32_t>(u & 0xffffffffu));
        u >>= 32;
    }
    normalize_sign();
}

void BigInt::trim(std::vector<uint32_t>& m) {
    while (!m.empty() && m.back() == 0) m.pop_back();
}

void BigInt::normalize_sign() {
    trim(mag_);
    if (mag_.empty()) neg_ = false;
}

void BigInt::mul_small_add(std::vector<uint32_t>& m, uint32_t mul, uint32_t add) {
    uint64_t carry = add;
    for (auto& limb : m) {
        uint64_t cur = static_cast<uint64_t>(limb) * mul + carry;
        limb = static_cast<uint32_t>(cur & 0xffffffffu);
        carry = cur >> 32;
    }
    while (carry != 0) {
        m.push_back(static_cast<uint32_t>(carry & 0xffffffffu));
        carry >>= 32;
    }
}

uint32_t BigInt::divmod_small(std::vector<uint32_t>& m, uint32_t d) {
    assert(d != 0);
    uint64_t rem = 0;
    for (size_t i = m.size(); i-- > 0;) {
        uint64_t cur = (rem << 32) | m[i];
        m[i] = static_cast<uint32_t>(cur / d);
        rem = cur % d;
    }
    trim(m);
    return static_cast<uint32_t>(rem);
}

BigInt BigInt::parse(std::string_view text) {
    size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    if (i >= text.size()) throw std::invalid_argument("empty integer literal");
    BigInt out;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c > '9') throw std::invalid_argument("bad digit in integer literal");
        mul_small_add(out.mag_, 10, static_cast<uint32_t>(c - '0'));
    }
    out.neg_ = neg;
    out.normalize_sign();
    return out;
}

std::string BigInt::str() const {
    if (mag_.empty()) return "0";
    std::vector<uint32_t> work = mag_;
    std::string digits;
    while (!work.empty()) {
        uint32_t chunk = divmod_small(work, 1000000000u);
        for (int k = 0; k < 9; ++k) {
            digits.push_back(static_cast<char>('0' + chunk % 10));
            chunk /= 10;
        }
    }
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    if (neg_) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
}

int BigInt::cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

int BigInt::compare(const BigInt& rhs) const {
    if (neg_ != rhs.neg_) return neg_ ? -1 : 1;
    int c = cmp_mag(mag_, rhs.mag_);
    return neg_ ? -c : c;
}

std::vector<uint32_t> BigInt::add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    std::vector<uint32_t> out;
    out.reserve(std::max(a.size(), b.size()) + 1);
    uint64_t carry = 0;
    for (size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        uint64_t cur = carry;
        if (i < a.size()) cur += a[i];
        if (i < b.size()) cur += b[i];
        out.push_back(static_cast<uint32_t>(cur & 0xffffffffu));
        carry = cur >> 32;
    }
    if (carry) out.push_back(static_cast<uint32_t>(carry));
    return out;
}

std::vector<uint32_t> BigInt::sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    assert(cmp_mag(a, b) >= 0);
    std::vector<uint32_t> out;
    out.reserve(a.size());
    int64_t borrow = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        int64_t cur = static_cast<int64_t>(a[i]) - borrow - (i < b.size() ? b[i] : 0);
        if (cur < 0) {
            cur += static_cast<int64_t>(kBase);
            borrow = 1;
        } else {
            borrow = 0;
        }
        out.push_back(static_cast<uint32_t>(cur));
    }
    trim(out);
    return out;
}

std::vector<uint32_t> BigInt::mul_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<uint32_t> out(a.size() + b.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) {
        uint64_t carry = 0;
        for (size_t j = 0; j < b.size(); ++j) {
            uint64_t cur = static_cast<uint64_t>(a[i]) * b[j] + out[i + j] + carry;
            out[i + j] = static_cast<uint32_t>(cur & 0xffffffffu);
            carry = cur >> 32;
        }
        size_t k = i + b.size();
        while (carry != 0) {
            uint64_t cur = out[k] + carry;
            out[k] = static_cast<uint32_t>(cur & 0xffffffffu);
            carry = cur >> 32;
            ++k;
        }
    }
    trim(out);
    return out;
}

// Knuth algorithm D with normalization so the top divisor limb >= base/2.
void BigInt::divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                        std::vector<uint32_t>& q, std::vector<uint32_t>& r) {
    assert(!b.empty());
    q.clear();
    r.clear();
    if (cmp_mag(a, b) < 0) {
        r = a;
        return;
    }
    if (b.size() == 1) {
        q = a;
        uint32_t rem = divmod_small(q, b[0]);
        if (rem) r.push_back(rem);
        return;
    }

    int shift = 0;
    for (uint32_t top = b.back(); (top & 0x80000000u) == 0; top <<= 1) ++shift;

    auto shl = [&](const std::vector<uint32_t>& m) {
        std::vector<uint32_t> out(m.size() + 1, 0);
        for (size_t i = 0; i < m.size(); ++i) {
            out[i] |= shift ? (m[i] << shift) : m[i];
            if (shift) out[i + 1] = m[i] >> (32 - shift);
        }
        trim(out);
        return out;
    };

    std::vector<uint32_t> u = shl(a);
    std::vector<uint32_t> v = shl(b);
    size_t n = v.size();
    size_t m = u.size() - n;
    u.resize(u.size() + 1, 0);  // u[m+n] slot for algorithm D
    q.assign(m + 1, 0);

    for (size_t j = m + 1; j-- > 0;) {
        uint64_t top2 = (static_cast<uint64_t>(u[j + n]) << 32) | u[j + n - 1];
        uint64_t qhat = top2 / v[n - 1];
        uint64_t rhat = top2 % v[n - 1];
        while (qhat >= kBase ||
               qhat * v[n - 2] > ((rhat << 32) | u[j + n - 2])) {
            --qhat;
            rhat += v[n - 1];
            if (rhat >= kBase) break;
        }
        // Multiply-subtract qhat*v from u[j..j+n].
        int64_t borrow = 0;
        uint64_t carry = 0;
        for (size_t i = 0; i < n; ++i) {
            uint64_t p = qhat * v[i] + carry;
            carry = p >> 32;
            int64_t t = static_cast<int64_t>(u[i + j]) - static_cast<int64_t>(p & 0xffffffffu) - borrow;
            if (t < 0) {
                t += static_cast<int64_t>(kBase);
                borrow = 1;
            } else {
                borrow = 0;
            }
            u[i + j] = static_cast<uint32_t>(t);
        }
        int64_t t = static_cast<int64_t>(u[j + n]) - static_cast<int64_t>(carry) - borrow;
        if (t < 0) {
            // qhat was one too large: add v back once.
            t += static_cast<int64_t>(kBase);
            --qhat;
            uint64_t c2 = 0;
            for (size_t i = 0; i < n; ++i) {
                uint64_t s = static_cast<uint64_t>(u[i + j]) + v[i] + c2;
                u[i + j] = static_cast<uint32_t>(s & 0xffffffffu);
                c2 = s >> 32;
            }
            t += static_cast<int64_t>(c2);
            t &= 0xffffffffll;
        }
        u[j + n] = static_cast<uint32_t>(t);
        q[j] = static_cast<uint32_t>(qhat);
    }

    trim(q);
    u.resize(n);
    if (shift) {
        for (size_t i = 0; i + 1 < u.size(); ++i)
            u[i] = (u[i] >> shift) | (u[i + 1] << (32 - shift));
        if (!u.empty()) u.back() >>= shift;
    }
    trim(u);
    r = std::move(u);
}

BigInt BigInt::operator-() const {
    BigInt out = *this;
    if (!out.mag_.empty()) out.neg_ = !out.neg_;
    return out;
}

BigInt BigInt::operator+(const BigInt& rhs) const {
    BigInt out;
    if (neg_ == rhs.neg_) {
        out.mag_ = add_mag(mag_, rhs.mag_);
        out.neg_ = neg_;
    } else if (cmp_mag(mag_, rhs.mag_) >= 0) {
        out.mag_ = sub_mag(mag_, rhs.mag_);
        out.neg_ = neg_;
    } else {
        out.mag_ = sub_mag(rhs.mag_, mag_);
        out.neg_ = rhs.neg_;
    }
    out.normalize_sign();
    return out;
}

BigInt BigInt::operator-(const BigInt& rhs) const { return *this + (-rhs); }

BigInt BigInt::operator*(const BigInt& rhs) const {
    BigInt out;
    out.mag_ = mul_mag(mag_, rhs.mag_);
    out.neg_ = neg_ != rhs.neg_;
    out.normalize_sign();
    return out;
}

BigInt BigInt::operator/(const BigInt& rhs) const {
    if (rhs.is_zero()) throw std::domain_error("division by zero");
    BigInt out;
    std::vector<uint32_t> r;
    divmod_mag(mag_, rhs.mag_, out.mag_, r);
    out.neg_ = neg_ != rhs.neg_;
    out.normalize_sign();
    return out;
}

BigInt BigInt::operator%(const BigInt& rhs) const {
    if (rhs.is_zero()) throw std::domain_error("division by zero");
    BigInt out;
    std::vector<uint32_t> q;
    divmod_mag(mag_, rhs.mag_, q, out.mag_);
    out.neg_ = neg_;
    out.normalize_sign();
    return out;
}

bool BigInt::fits_int64() const {
    if (mag_.size() > 2) return false;
    uint64_t u = 0;
    if (mag_.size() >= 1) u = mag_[0];
    if (mag_.size() == 2) u |= static_cast<uint64_t>(mag_[1]) << 32;
    if (neg_) return u <= 0x8000000000000000ull;
    return u <= 0x7fffffffffffffffull;
}

int64_t BigInt::to_int64() const {
    if (!fits_int64()) throw std::range_error("integer too large for builtin range");
    uint64_t u = 0;
    if (mag_.size() >= 1) u = mag_[0];
    if (mag_.size() == 2) u |= static_cast<uint64_t>(mag_[1]) << 32;
    return neg_ ? -static_cast<int64_t>(u) : static_cast<int64_t>(u);
}

}  // namespace quanta
