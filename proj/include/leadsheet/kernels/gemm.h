#pragma once

#include <cstddef>

namespace leadsheet::kernels {

// Row-major dense products used by the autograd engine. Every routine comes
// in a serial reference form and an OpenMP form. The parallel form splits the
// output rows across threads and keeps the per-element summation order of the
// serial loop, so both produce bit-identical results.
//
//   gemm     C (m x n) [+]= A (m x k)  * B (k x n)
//   gemm_tn  C (k x n) [+]= A^T        * B,  A is m x k, B is m x n
//   gemm_nt  C (m x n) [+]= A (m x k)  * B^T, B is n x k
namespace serial {
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
}  // namespace serial

namespace parallel {
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
}  // namespace parallel

// Products smaller than this many multiply-adds stay on the calling thread;
// forking a team costs more than the work.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

// Process-wide switch, on by default. Tests and the benchmark flip it to
// compare the two paths.
void set_parallel(bool enabled);
bool parallel_enabled();

// Dispatching entry points used by the library.
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate);

}  // namespace leadsheet::kernels
