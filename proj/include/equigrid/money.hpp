#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace equigrid {

/// Fixed-point money in hundredths of the scenario currency unit (millions of USD
/// for the bundled scenarios). All budget accounting goes through this type so
/// that conservation checks are exact.
class Money {
public:
    constexpr Money() = default;

    static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }

    /// Rounds half away from zero to the nearest cent.
    static Money from_double(double value) {
        if (!std::isfinite(value)) {
            throw std::invalid_argument("money value is not finite");
        }
        return Money(static_cast<std::int64_t>(std::llround(value * 100.0)));
    }

    constexpr std::int64_t cents() const { return cents_; }
    constexpr double to_double() const { return static_cast<double>(cents_) / 100.0; }

    constexpr Money operator+(Money other) const { return Money(cents_ + other.cents_); }
    constexpr Money operator-(Money other) const { return Money(cents_ - other.cents_); }
    constexpr Money& operator+=(Money other) { cents_ += other.cents_; return *this; }
    constexpr Money& operator-=(Money other) { cents_ -= other.cents_; return *this; }
    constexpr Money operator-() const { return Money(-cents_); }

    constexpr auto operator<=>(const Money&) const = default;

    std::string to_string() const {
        const std::int64_t mag = cents_ < 0 ? -cents_ : cents_;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents_ < 0 ? "-" : "",
                      static_cast<long long>(mag / 100), static_cast<long long>(mag % 100));
        return buf;
    }

private:
    constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
    std::int64_t cents_ = 0;
};

}  // namespace equigrid
