#include "cloneforge/kernels.hpp"

#include <cstring>
#include <stdexcept>

#if defined(__x86_64__) || defined(__i386__)
#define CLONEFORGE_X86 1
#include <immintrin.h>
#else
#define CLONEFORGE_X86 0
#endif

namespace cloneforge::kernels {

namespace {

inline std::uint64_t points_mask(unsigned n_points) {
    return n_points >= 64 ? ~0ULL : ((1ULL << n_points) - 1);
}

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------

void mix_radix_u32_scalar(std::uint32_t* idx, const std::uint8_t* const* vals, int k,
                          std::size_t n, std::uint32_t q) {
    for (std::size_t p = 0; p < n; ++p) {
        std::uint32_t acc = vals[0][p];
        for (int v = 1; v < k; ++v)
            acc = acc * q + vals[v][p];
        idx[p] = acc;
    }
}

void gather_u8_scalar(std::uint8_t* out, const std::uint32_t* lut_w, const std::uint32_t* idx,
                      std::size_t n) {
    for (std::size_t p = 0; p < n; ++p)
        out[p] = static_cast<std::uint8_t>(lut_w[idx[p]]);
}

bool all_nonzero_u8_scalar(const std::uint8_t* a, std::size_t n) {
    for (std::size_t p = 0; p < n; ++p)
        if (a[p] == 0)
            return false;
    return true;
}

// Shannon-expansion mux over the packed table: fold arguments from x_k (the
// row-major LSB) up to x_1, selecting between the two half-tables per point.
std::uint64_t compose_packed2_scalar(std::uint64_t f_mask, int k, const std::uint64_t* g_masks,
                                     unsigned n_points) {
    std::uint64_t cur[64];
    int width = 1 << k;
    for (int j = 0; j < width; ++j)
        cur[j] = (f_mask >> j & 1) ? ~0ULL : 0ULL;
    for (int v = k - 1; v >= 0; --v) {
        const std::uint64_t s = g_masks[v];
        width >>= 1;
        for (int j = 0; j < width; ++j)
            cur[j] = (s & cur[2 * j + 1]) | (~s & cur[2 * j]);
    }
    return cur[0] & points_mask(n_points);
}

void compose_packed2_batch_scalar(std::uint64_t f_mask, int k, const std::uint64_t* g_prefix,
                                  const std::uint64_t* last, std::uint64_t* out,
                                  std::size_t count, unsigned n_points) {
    std::uint64_t g[64];
    for (int v = 0; v + 1 < k; ++v)
        g[v] = g_prefix[v];
    for (std::size_t i = 0; i < count; ++i) {
        g[k - 1] = last[i];
        out[i] = compose_packed2_scalar(f_mask, k, g, n_points);
    }
}

// ---------------------------------------------------------------------------
// AVX2 kernels
// ---------------------------------------------------------------------------

#if CLONEFORGE_X86

__attribute__((target("avx2"))) void mix_radix_u32_avx2(std::uint32_t* idx,
                                                        const std::uint8_t* const* vals, int k,
                                                        std::size_t n, std::uint32_t q) {
    const __m256i qv = _mm256_set1_epi32(static_cast<int>(q));
    std::size_t p = 0;
    for (; p + 8 <= n; p += 8) {
        __m256i acc = _mm256_cvtepu8_epi32(
            _mm_loadl_epi64(reinterpret_cast<const __m128i*>(vals[0] + p)));
        for (int v = 1; v < k; ++v) {
            __m256i x = _mm256_cvtepu8_epi32(
                _mm_loadl_epi64(reinterpret_cast<const __m128i*>(vals[v] + p)));
            acc = _mm256_add_epi32(_mm256_mullo_epi32(acc, qv), x);
        }
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(idx + p), acc);
    }
    if (p < n) {
        const std::uint8_t* tail[64];
        for (int v = 0; v < k; ++v)
            tail[v] = vals[v] + p;
        mix_radix_u32_scalar(idx + p, tail, k, n - p, q);
    }
}

__attribute__((target("avx2"))) void gather_u8_avx2(std::uint8_t* out, const std::uint32_t* lut_w,
                                                    const std::uint32_t* idx, std::size_t n) {
    std::size_t p = 0;
    alignas(32) std::uint32_t tmp[8];
    for (; p + 8 <= n; p += 8) {
        __m256i iv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(idx + p));
        __m256i g = _mm256_i32gather_epi32(reinterpret_cast<const int*>(lut_w), iv, 4);
        _mm256_store_si256(reinterpret_cast<__m256i*>(tmp), g);
        for (int j = 0; j < 8; ++j)
            out[p + j] = static_cast<std::uint8_t>(tmp[j]);
    }
    gather_u8_scalar(out + p, lut_w, idx + p, n - p);
}

__attribute__((target("avx2"))) bool all_nonzero_u8_avx2(const std::uint8_t* a, std::size_t n) {
    const __m256i zero = _mm256_setzero_si256();
    std::size_t p = 0;
    for (; p + 32 <= n; p += 32) {
        __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + p));
        __m256i eq = _mm256_cmpeq_epi8(x, zero);
        if (_mm256_movemask_epi8(eq) != 0)
            return false;
    }
    return all_nonzero_u8_scalar(a + p, n - p);
}

__attribute__((target("avx2"))) void compose_packed2_batch_avx2(std::uint64_t f_mask, int k,
                                                                const std::uint64_t* g_prefix,
                                                                const std::uint64_t* last,
                                                                std::uint64_t* out,
                                                                std::size_t count,
                                                                unsigned n_points) {
    std::uint64_t leaves[64];
    const int full = 1 << k;
    for (int j = 0; j < full; ++j)
        leaves[j] = (f_mask >> j & 1) ? ~0ULL : 0ULL;
    const __m256i live = _mm256_set1_epi64x(static_cast<long long>(points_mask(n_points)));

    std::size_t i = 0;
    __m256i cur[32];
    for (; i + 4 <= count; i += 4) {
        __m256i sel = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(last + i));
        int width = full >> 1;
        for (int j = 0; j < width; ++j) {
            __m256i m1 = _mm256_set1_epi64x(static_cast<long long>(leaves[2 * j + 1]));
            __m256i m0 = _mm256_set1_epi64x(static_cast<long long>(leaves[2 * j]));
            cur[j] = _mm256_or_si256(_mm256_and_si256(sel, m1), _mm256_andnot_si256(sel, m0));
        }
        for (int v = k - 2; v >= 0; --v) {
            __m256i s = _mm256_set1_epi64x(static_cast<long long>(g_prefix[v]));
            width >>= 1;
            for (int j = 0; j < width; ++j)
                cur[j] = _mm256_or_si256(_mm256_and_si256(s, cur[2 * j + 1]),
                                         _mm256_andnot_si256(s, cur[2 * j]));
        }
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i),
                            _mm256_and_si256(cur[0], live));
    }
    if (i < count)
        compose_packed2_batch_scalar(f_mask, k, g_prefix, last + i, out + i, count - i, n_points);
}

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }

#else

bool cpu_has_avx2() { return false; }

#endif // CLONEFORGE_X86

// ---------------------------------------------------------------------------
// dispatch table
// ---------------------------------------------------------------------------

struct dispatch_table {
    void (*mix)(std::uint32_t*, const std::uint8_t* const*, int, std::size_t, std::uint32_t);
    void (*gather)(std::uint8_t*, const std::uint32_t*, const std::uint32_t*, std::size_t);
    bool (*all_nz)(const std::uint8_t*, std::size_t);
    void (*packed_batch)(std::uint64_t, int, const std::uint64_t*, const std::uint64_t*,
                         std::uint64_t*, std::size_t, unsigned);
};

constexpr dispatch_table scalar_table = {
    mix_radix_u32_scalar,
    gather_u8_scalar,
    all_nonzero_u8_scalar,
    compose_packed2_batch_scalar,
};

#if CLONEFORGE_X86
constexpr dispatch_table avx2_table = {
    mix_radix_u32_avx2,
    gather_u8_avx2,
    all_nonzero_u8_avx2,
    compose_packed2_batch_avx2,
};
#endif

isa_level g_active = cpu_has_avx2() ? isa_level::avx2 : isa_level::scalar;

const dispatch_table& active_table() {
#if CLONEFORGE_X86
    if (g_active == isa_level::avx2)
        return avx2_table;
#endif
    return scalar_table;
}

} // namespace

isa_level detected_isa() { return cpu_has_avx2() ? isa_level::avx2 : isa_level::scalar; }

isa_level active_isa() { return g_active; }

void force_isa(isa_level lvl) {
    if (lvl == isa_level::avx2 && !cpu_has_avx2())
        throw std::invalid_argument("kernels: avx2 not supported on this CPU");
    g_active = lvl;
}

const char* isa_name(isa_level lvl) {
    switch (lvl) {
    case isa_level::scalar: return "scalar";
    case isa_level::avx2: return "avx2";
    }
    return "?";
}

void mix_radix_u32(std::uint32_t* idx, const std::uint8_t* const* vals, int k, std::size_t n,
                   std::uint32_t q) {
    active_table().mix(idx, vals, k, n, q);
}

void widen_lut(const std::uint8_t* lut, std::size_t n, std::uint32_t* out) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lut[i];
}

void gather_u8(std::uint8_t* out, const std::uint32_t* lut_w, const std::uint32_t* idx,
               std::size_t n) {
    active_table().gather(out, lut_w, idx, n);
}

bool all_nonzero_u8(const std::uint8_t* a, std::size_t n) { return active_table().all_nz(a, n); }

std::uint64_t compose_packed2(std::uint64_t f_mask, int k, const std::uint64_t* g_masks,
                              unsigned n_points) {
    return compose_packed2_scalar(f_mask, k, g_masks, n_points);
}

void compose_packed2_batch(std::uint64_t f_mask, int k, const std::uint64_t* g_prefix,
                           const std::uint64_t* last, std::uint64_t* out, std::size_t count,
                           unsigned n_points) {
    active_table().packed_batch(f_mask, k, g_prefix, last, out, count, n_points);
}

} // namespace cloneforge::kernels
