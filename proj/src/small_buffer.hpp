#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace shiftsum::detail {

// Scratch storage that stays on the stack for the small sizes the lattice
// loops use and spills to the heap otherwise.
template <class T, std::size_t N = 64>
class SmallBuffer {
 public:
  explicit SmallBuffer(std::size_t size) : size_(size) {
    if (size > N) heap_.resize(size);
    ptr_ = size > N ? heap_.data() : inline_.data();
    for (std::size_t i = 0; i < size; ++i) ptr_[i] = T{};
  }
  SmallBuffer(const SmallBuffer&) = delete;
  SmallBuffer& operator=(const SmallBuffer&) = delete;

  T& operator[](std::size_t i) { return ptr_[i]; }
  const T& operator[](std::size_t i) const { return ptr_[i]; }
  T* data() { return ptr_; }
  std::size_t size() const { return size_; }
  std::span<T> span() { return {ptr_, size_}; }

 private:
  std::array<T, N> inline_;
  std::vector<T> heap_;
  T* ptr_;
  std::size_t size_;
};

}  // namespace shiftsum::detail
