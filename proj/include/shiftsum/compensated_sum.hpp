#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace shiftsum {

/// Neumaier's variant of Kahan summation. Unlike plain Kahan it stays
/// accurate when an added term is larger than the running sum, which is the
/// common case for inverse determinant sums (the first shells dominate).
class CompensatedSum {
 public:
  constexpr CompensatedSum() = default;

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    abs_sum_ += std::abs(x);
    ++count_;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  // Merging is exact up to one extra rounding; partitioned reductions merge in
  // a fixed order so the result does not depend on scheduling.
  void merge(const CompensatedSum& other) noexcept {
    const std::uint64_t n = count_ + other.count_;
    const double a = abs_sum_ + other.abs_sum_;
    add(other.sum_);
    add(other.comp_);
    count_ = n;
    abs_sum_ = a;
  }

  double value() const noexcept { return sum_ + comp_; }
  std::uint64_t count() const noexcept { return count_; }

  /// Rigorous-in-spirit bound for Neumaier summation:
  /// 2u|S| + 2n u^2 sum|x_i|.
  double error_bound() const noexcept {
    constexpr double u = std::numeric_limits<double>::epsilon() / 2;
    return 2 * u * std::abs(value()) + 2 * static_cast<double>(count_) * u * u * abs_sum_;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double abs_sum_ = 0.0;
  std::uint64_t count_ = 0;
};

}  // namespace shiftsum
