#include "leadsheet/kernels/gemm.h"

#include <atomic>

namespace leadsheet::kernels {

namespace {

std::atomic<bool> g_parallel{true};

std::size_t work(int m, int k, int n) {
  return static_cast<std::size_t>(m) * static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
}

// One output row of A * B: c_row[j] += sum_p a_row[p] * B[p][j], p ascending.
template <typename T>
inline void row_nn(const T* a_row, const T* b, T* c_row, int k, int n) {
  for (int p = 0; p < k; ++p) {
    const T av = a_row[p];
    const T* b_row = b + static_cast<std::size_t>(p) * n;
    for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
  }
}

// Row r of A^T * B: c_row[j] += sum_i A[i][r] * B[i][j], i ascending.
template <typename T>
inline void row_tn(const T* a, const T* b, T* c_row, int r, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T av = a[static_cast<std::size_t>(i) * k + r];
    const T* b_row = b + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
  }
}

// Row of A * B^T: c_row[j] += dot(a_row, B[j]).
template <typename T>
inline void row_nt(const T* a_row, const T* b, T* c_row, int k, int n) {
  for (int j = 0; j < n; ++j) {
    const T* b_row = b + static_cast<std::size_t>(j) * k;
    T sum = T(0);
    for (int p = 0; p < k; ++p) sum += a_row[p] * b_row[p];
    c_row[j] += sum;
  }
}

template <typename T>
inline void clear_row(T* c_row, int n, bool accumulate) {
  if (!accumulate) {
    for (int j = 0; j < n; ++j) c_row[j] = T(0);
  }
}

}  // namespace

namespace serial {

template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    T* c_row = c + static_cast<std::size_t>(i) * n;
    clear_row(c_row, n, accumulate);
    row_nn(a + static_cast<std::size_t>(i) * k, b, c_row, k, n);
  }
}

template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  for (int r = 0; r < k; ++r) {
    T* c_row = c + static_cast<std::size_t>(r) * n;
    clear_row(c_row, n, accumulate);
    row_tn(a, b, c_row, r, m, k, n);
  }
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    T* c_row = c + static_cast<std::size_t>(i) * n;
    clear_row(c_row, n, accumulate);
    row_nt(a + static_cast<std::size_t>(i) * k, b, c_row, k, n);
  }
}

}  // namespace serial

namespace parallel {

template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
#pragma omp parallel for schedule(static) if (work(m, k, n) >= kParallelThreshold)
  for (int i = 0; i < m; ++i) {
    T* c_row = c + static_cast<std::size_t>(i) * n;
    clear_row(c_row, n, accumulate);
    row_nn(a + static_cast<std::size_t>(i) * k, b, c_row, k, n);
  }
}

template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
#pragma omp parallel for schedule(static) if (work(m, k, n) >= kParallelThreshold)
  for (int r = 0; r < k; ++r) {
    T* c_row = c + static_cast<std::size_t>(r) * n;
    clear_row(c_row, n, accumulate);
    row_tn(a, b, c_row, r, m, k, n);
  }
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
#pragma omp parallel for schedule(static) if (work(m, k, n) >= kParallelThreshold)
  for (int i = 0; i < m; ++i) {
    T* c_row = c + static_cast<std::size_t>(i) * n;
    clear_row(c_row, n, accumulate);
    row_nt(a + static_cast<std::size_t>(i) * k, b, c_row, k, n);
  }
}

}  // namespace parallel

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  if (parallel_enabled()) {
    parallel::gemm(a, b, c, m, k, n, accumulate);
  } else {
    serial::gemm(a, b, c, m, k, n, accumulate);
  }
}

template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  if (parallel_enabled()) {
    parallel::gemm_tn(a, b, c, m, k, n, accumulate);
  } else {
    serial::gemm_tn(a, b, c, m, k, n, accumulate);
  }
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  if (parallel_enabled()) {
    parallel::gemm_nt(a, b, c, m, k, n, accumulate);
  } else {
    serial::gemm_nt(a, b, c, m, k, n, accumulate);
  }
}

#define LEADSHEET_INSTANTIATE(T)                                              \
  template void serial::gemm<T>(const T*, const T*, T*, int, int, int, bool);    \
  template void serial::gemm_tn<T>(const T*, const T*, T*, int, int, int, bool); \
  template void serial::gemm_nt<T>(const T*, const T*, T*, int, int, int, bool); \
  template void parallel::gemm<T>(const T*, const T*, T*, int, int, int, bool);  \
  template void parallel::gemm_tn<T>(const T*, const T*, T*, int, int, int, bool); \
  template void parallel::gemm_nt<T>(const T*, const T*, T*, int, int, int, bool); \
  template void gemm<T>(const T*, const T*, T*, int, int, int, bool);            \
  template void gemm_tn<T>(const T*, const T*, T*, int, int, int, bool);         \
  template void gemm_nt<T>(const T*, const T*, T*, int, int, int, bool);

LEADSHEET_INSTANTIATE(float)
LEADSHEET_INSTANTIATE(double)

#undef LEADSHEET_INSTANTIATE

}  // namespace leadsheet::kernels
