#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

#include <fftw3.h>

namespace rnsm {

using cplx = std::complex<double>;

// fftw_malloc keeps every buffer SIMD-aligned, so cached plans can be
// executed on any of them through the new-array interface.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using RealArray = std::vector<double, FftwAllocator<double>>;
using ComplexArray = std::vector<cplx, FftwAllocator<cplx>>;

}  // namespace rnsm
