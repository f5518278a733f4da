#pragma once

// Byte/bit scanning kernels used by the coverage verifier and the exact-cover
// oracle. Each has a portable scalar version and an AVX2 version; the public
// entry points dispatch once at runtime.

#include <cstddef>
#include <cstdint>

namespace tilesmith::kernels {

enum class Isa { scalar, avx2 };

/// The ISA picked by the dispatcher. Set TILESMITH_SIMD=scalar to force the
/// portable path.
Isa active_isa();
const char* isa_name(Isa isa);

/// First index i in [from, n) with a[i] != b[i], or n.
std::size_t first_mismatch_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                              std::size_t from = 0);
/// First zero bit at position >= from among nbits bits, or nbits.
std::size_t find_first_zero_bit(const std::uint64_t* words, std::size_t nbits, std::size_t from = 0);
std::uint64_t popcount(const std::uint64_t* words, std::size_t nwords);

namespace scalar {
std::size_t first_mismatch_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                              std::size_t from);
std::size_t find_first_zero_bit(const std::uint64_t* words, std::size_t nbits, std::size_t from);
std::uint64_t popcount(const std::uint64_t* words, std::size_t nwords);
}  // namespace scalar

namespace avx2 {
bool available();
std::size_t first_mismatch_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                              std::size_t from);
std::size_t find_first_zero_bit(const std::uint64_t* words, std::size_t nbits, std::size_t from);
std::uint64_t popcount(const std::uint64_t* words, std::size_t nwords);
}  // namespace avx2

}  // namespace tilesmith::kernels
