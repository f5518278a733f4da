#include "tilesmith/kernels.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>

#if defined(__x86_64__) || defined(__i386__)
#define TILESMITH_X86 1
#include <immintrin.h>
#else
#define TILESMITH_X86 0
#endif

namespace tilesmith::kernels {

namespace scalar {

std::size_t first_mismatch_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                              std::size_t from) {
  for (std::size_t i = from; i < n; ++i)
    if (a[i] != b[i]) return i;
  return n;
}

std::size_t find_first_zero_bit(const std::uint64_t* words, std::size_t nbits, std::size_t from) {
  if (from >= nbits) return nbits;
  std::size_t w = from / 64;
  std::uint64_t cur = ~words[w] & (~std::uint64_t{0} << (from % 64));
  const std::size_t nwords = (nbits + 63) / 64;
  while (true) {
    if (cur) {
      std::size_t pos = w * 64 + static_cast<std::size_t>(std::countr_zero(cur));
      return pos < nbits ? pos : nbits;
    }
    if (++w >= nwords) return nbits;
    cur = ~words[w];
  }
}

std::uint64_t popcount(const std::uint64_t* words, std::size_t nwords) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < nwords; ++i) c += static_cast<std::uint64_t>(std::popcount(words[i]));
  return c;
}

}  // namespace scalar

namespace avx2 {

#if TILESMITH_X86

bool available() {
  return __builtin_cpu_supports("avx2");
}

__attribute__((target("avx2"))) std::size_t first_mismatch_u8(const std::uint8_t* a,
                                                                const std::uint8_t* b,
                                                                std::size_t n, std::size_t from) {
  std::size_t i = from;
  for (; i + 32 <= n; i += 32) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    auto eq = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb)));
    if (eq != 0xffffffffu) return i + static_cast<std::size_t>(std::countr_zero(~eq));
  }
  return scalar::first_mismatch_u8(a, b, n, i);
}

__attribute__((target("avx2"))) std::size_t find_first_zero_bit(const std::uint64_t* words,
                                                                  std::size_t nbits,
                                                                  std::size_t from) {
  if (from >= nbits) return nbits;
  const std::size_t nwords = (nbits + 63) / 64;
  std::size_t w = from / 64;
  // finish the partial leading word and align to 4-word groups scalar-wise
  std::uint64_t cur = ~words[w] & (~std::uint64_t{0} << (from % 64));
  while (true) {
    if (cur) {
      std::size_t pos = w * 64 + static_cast<std::size_t>(std::countr_zero(cur));
      return pos < nbits ? pos : nbits;
    }
    if (++w >= nwords) return nbits;
    if (w % 4 == 0) break;
    cur = ~words[w];
  }
  const __m256i ones = _mm256_set1_epi64x(-1);
  for (; w + 4 <= nwords; w += 4) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + w));
    if (!_mm256_testc_si256(v, ones)) break;
  }
  for (; w < nwords; ++w) {
    std::uint64_t inv = ~words[w];
    if (inv) {
      std::size_t pos = w * 64 + static_cast<std::size_t>(std::countr_zero(inv));
      return pos < nbits ? pos : nbits;
    }
  }
  return nbits;
}

// Nibble-lookup popcount (Mula et al. style), horizontal sum via SAD.
__attribute__((target("avx2"))) std::uint64_t popcount(const std::uint64_t* words,
                                                       std::size_t nwords) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2,
                                       1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= nwords; i += 4) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + i));
    __m256i lo = _mm256_and_si256(v, low);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
    __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  return total + scalar::popcount(words + i, nwords - i);
}

#else

bool available() { return false; }
std::size_t first_mismatch_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                              std::size_t from) {
  return scalar::first_mismatch_u8(a, b, n, from);
}
std::size_t find_first_zero_bit(const std::uint64_t* words, std::size_t nbits, std::size_t from) {
  return scalar::find_first_zero_bit(words, nbits, from);
}
std::uint64_t popcount(const std::uint64_t* words, std::size_t nwords) {
  return scalar::popcount(words, nwords);
}

#endif

}  // namespace avx2

namespace {

Isa detect() {
  const char* env = std::getenv("TILESMITH_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return avx2::available() ? Isa::avx2 : Isa::scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

const char* isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

std::size_t first_mismatch_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                              std::size_t from) {
  return active_isa() == Isa::avx2 ? avx2::first_mismatch_u8(a, b, n, from)
                                   : scalar::first_mismatch_u8(a, b, n, from);
}

std::size_t find_first_zero_bit(const std::uint64_t* words, std::size_t nbits, std::size_t from) {
  return active_isa() == Isa::avx2 ? avx2::find_first_zero_bit(words, nbits, from)
                                   : scalar::find_first_zero_bit(words, nbits, from);
}

std::uint64_t popcount(const std::uint64_t* words, std::size_t nwords) {
  return active_isa() == Isa::avx2 ? avx2::popcount(words, nwords)
                                   : scalar::popcount(words, nwords);
}

}  // namespace tilesmith::kernels
