/*
 * Copyright 2026 The actif Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIF_BENCH_ALLOCATION_HPP_
#define ACTIF_BENCH_ALLOCATION_HPP_

#include <errno.h>
#include <malloc.h>
#include <unistd.h>

#include <atomic>
#include <cstddef>
#include <cstdint>

#include "actif/error.hpp"

// Counting allocation hook. Exactly one translation unit of a program that
// wants peak-allocation measurements must expand
//
//   ACTIF_DEFINE_ALLOCATION_HOOK();
//
// at namespace scope. It interposes the C allocation family (malloc, free,
// calloc, realloc and the aligned variants) on top of glibc's internal entry
// points, so operator new, Eigen's aligned buffers and every other heap user
// are counted. Live bytes are accounted via malloc_usable_size. Without the
// hook peak_allocation() throws UnsupportedError.

#if !defined(__GLIBC__)
#error "actif allocation tracking requires glibc"
#endif

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
void __libc_free(void*);
}

namespace actif::bench {
namespace detail {

inline constinit std::atomic<bool> hook_installed{false};
inline constinit std::atomic<std::int64_t> live_bytes{0};
inline constinit std::atomic<std::int64_t> peak_bytes{0};

inline void note_alloc(void* p) {
  if (p == nullptr) return;
  const auto n = static_cast<std::int64_t>(malloc_usable_size(p));
  const std::int64_t now = live_bytes.fetch_add(n, std::memory_order_relaxed) + n;
  std::int64_t peak = peak_bytes.load(std::memory_order_relaxed);
  while (now > peak && !peak_bytes.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

inline void note_free(void* p) {
  if (p == nullptr) return;
  live_bytes.fetch_sub(static_cast<std::int64_t>(malloc_usable_size(p)),
                       std::memory_order_relaxed);
}

inline void* hooked_malloc(std::size_t n) {
  void* p = __libc_malloc(n);
  note_alloc(p);
  return p;
}

inline void* hooked_calloc(std::size_t count, std::size_t n) {
  void* p = __libc_calloc(count, n);
  note_alloc(p);
  return p;
}

inline void* hooked_realloc(void* old, std::size_t n) {
  const auto before = old ? static_cast<std::int64_t>(malloc_usable_size(old)) : 0;
  void* p = __libc_realloc(old, n);
  if (p == nullptr && n != 0) return nullptr;  // old block untouched
  live_bytes.fetch_sub(before, std::memory_order_relaxed);
  note_alloc(p);
  return p;
}

inline void* hooked_memalign(std::size_t align, std::size_t n) {
  void* p = __libc_memalign(align, n);
  note_alloc(p);
  return p;
}

inline int hooked_posix_memalign(void** out, std::size_t align, std::size_t n) {
  if (align % sizeof(void*) != 0 || (align & (align - 1)) != 0) return EINVAL;
  void* p = hooked_memalign(align, n);
  if (p == nullptr) return ENOMEM;
  *out = p;
  return 0;
}

inline void hooked_free(void* p) {
  note_free(p);
  __libc_free(p);
}

inline std::size_t page_size() { return static_cast<std::size_t>(sysconf(_SC_PAGESIZE)); }

}  // namespace detail

inline bool allocation_hook_installed() {
  return detail::hook_installed.load(std::memory_order_relaxed);
}

// Bytes currently live on the heap, as seen by the hook.
inline std::int64_t live_allocated_bytes() {
  return detail::live_bytes.load(std::memory_order_relaxed);
}

// High-water mark of live bytes above the level at entry, over the job.
template <class Job>
std::int64_t peak_allocation(Job&& job) {
  if (!allocation_hook_installed()) {
    throw UnsupportedError(
        "allocation tracking unavailable: ACTIF_DEFINE_ALLOCATION_HOOK() is not linked into "
        "this program");
  }
  const std::int64_t base = detail::live_bytes.load(std::memory_order_relaxed);
  detail::peak_bytes.store(base, std::memory_order_relaxed);
  job();
  return detail::peak_bytes.load(std::memory_order_relaxed) - base;
}

}  // namespace actif::bench

// clang-format off
#define ACTIF_DEFINE_ALLOCATION_HOOK()                                                         \
  extern "C" {                                                                                 \
  void* malloc(std::size_t n) { return ::actif::bench::detail::hooked_malloc(n); }             \
  void* calloc(std::size_t c, std::size_t n) {                                                 \
    return ::actif::bench::detail::hooked_calloc(c, n);                                        \
  }                                                                                            \
  void* realloc(void* p, std::size_t n) { return ::actif::bench::detail::hooked_realloc(p, n); } \
  void free(void* p) { ::actif::bench::detail::hooked_free(p); }                               \
  void* memalign(std::size_t a, std::size_t n) {                                               \
    return ::actif::bench::detail::hooked_memalign(a, n);                                      \
  }                                                                                            \
  void* aligned_alloc(std::size_t a, std::size_t n) {                                          \
    return ::actif::bench::detail::hooked_memalign(a, n);                                      \
  }                                                                                            \
  int posix_memalign(void** out, std::size_t a, std::size_t n) {                               \
    return ::actif::bench::detail::hooked_posix_memalign(out, a, n);                           \
  }                                                                                            \
  void* valloc(std::size_t n) {                                                                \
    return ::actif::bench::detail::hooked_memalign(::actif::bench::detail::page_size(), n);   \
  }                                                                                            \
  void* pvalloc(std::size_t n) {                                                               \
    const std::size_t page = ::actif::bench::detail::page_size();                              \
    return ::actif::bench::detail::hooked_memalign(page, (n + page - 1) / page * page);        \
  }                                                                                            \
  }                                                                                            \
  [[maybe_unused]] static const bool actif_allocation_hook_registered_ =                       \
      (::actif::bench::detail::hook_installed.store(true), true)
// clang-format on

#endif  // ACTIF_BENCH_ALLOCATION_HPP_
