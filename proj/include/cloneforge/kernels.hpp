#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops for operation-table arithmetic.
//
// Every kernel has a scalar reference implementation and (on x86-64) an AVX2
// variant. The active variant is picked at runtime from CPU capabilities and
// can be forced for testing; the two must agree bit for bit on every input,
// which tests/test_kernels.cpp checks against random data.
//
// Value tables use one byte per entry. A table of arity k over base size q
// has q^k entries in row-major order with x1 most significant. For q = 2 a
// table is alternatively packed into a uint64_t, bit j = entry j.

namespace cloneforge::kernels {

enum class isa_level { scalar, avx2 };

isa_level detected_isa();
isa_level active_isa();
// Force a level (tests, --kernels flag). Throws std::invalid_argument if the
// CPU cannot run it.
void force_isa(isa_level);
const char* isa_name(isa_level);

// idx[p] = ((vals[0][p]*q + vals[1][p])*q + ...)*q + vals[k-1][p], p < n.
// This is the row-major flat index of the tuple (vals[0][p], ..., vals[k-1][p]).
void mix_radix_u32(std::uint32_t* idx, const std::uint8_t* const* vals, int k,
                   std::size_t n, std::uint32_t q);

// out[p] = lut[idx[p]] where lut has been widened to u32 (see widen_lut).
// The widened form exists so the AVX2 path can use 4-byte gathers without
// reading past the end of a byte table.
void widen_lut(const std::uint8_t* lut, std::size_t n, std::uint32_t* out);
void gather_u8(std::uint8_t* out, const std::uint32_t* lut_w, const std::uint32_t* idx,
               std::size_t n);

// true iff a[p] != 0 for all p < n
bool all_nonzero_u8(const std::uint8_t* a, std::size_t n);

// Packed q=2 composition: f has arity k (mask of 2^k bits), g_masks[v] holds
// the per-point values of argument v+1 over n_points <= 64 points (bit p =
// value at point p). Returns the mask of f(g_1,...,g_k) over those points,
// with bits >= n_points cleared.
std::uint64_t compose_packed2(std::uint64_t f_mask, int k, const std::uint64_t* g_masks,
                              unsigned n_points);

// Batched form used by the closure frontier: the first k-1 argument masks are
// fixed, the last one sweeps over last[0..count). out[i] = composition with
// last[i] in the final slot.
void compose_packed2_batch(std::uint64_t f_mask, int k, const std::uint64_t* g_prefix,
                           const std::uint64_t* last, std::uint64_t* out, std::size_t count,
                           unsigned n_points);

} // namespace cloneforge::kernels
