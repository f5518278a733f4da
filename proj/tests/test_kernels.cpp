#include <random>
#include <vector>

#include "doctest.h"
#include "tilesmith/kernels.hpp"

using namespace tilesmith::kernels;

namespace {

// naive references
std::size_t ref_mismatch(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, std::size_t from) {
  for (std::size_t i = from; i < a.size(); ++i)
    if (a[i] != b[i]) return i;
  return a.size();
}

std::size_t ref_zero_bit(const std::vector<std::uint64_t>& w, std::size_t nbits, std::size_t from) {
  for (std::size_t i = from; i < nbits; ++i)
    if (!(w[i / 64] >> (i % 64) & 1)) return i;
  return nbits;
}

std::uint64_t ref_popcount(const std::vector<std::uint64_t>& w) {
  std::uint64_t n = 0;
  for (auto x : w)
    for (int i = 0; i < 64; ++i) n += x >> i & 1;
  return n;
}

}  // namespace

TEST_CASE("dispatcher names an ISA") {
  auto isa = active_isa();
  CHECK((isa == Isa::scalar || isa == Isa::avx2));
  CHECK(std::string(isa_name(isa)).size() > 0);
}

TEST_CASE("first_mismatch_u8: scalar, avx2 and the naive loop agree") {
  std::mt19937_64 g(3);
  for (int it = 0; it < 2000; ++it) {
    std::size_t n = g() % 300;
    std::vector<std::uint8_t> a(n), b(n);
    for (auto& x : a) x = static_cast<std::uint8_t>(g());
    b = a;
    // sparse differences so long equal runs are common
    for (int k = static_cast<int>(g() % 3); k-- > 0 && n;) b[g() % n] ^= static_cast<std::uint8_t>(1 + g() % 255);
    std::size_t from = n ? g() % (n + 1) : 0;
    auto want = ref_mismatch(a, b, from);
    CHECK(scalar::first_mismatch_u8(a.data(), b.data(), n, from) == want);
    if (avx2::available()) CHECK(avx2::first_mismatch_u8(a.data(), b.data(), n, from) == want);
    CHECK(first_mismatch_u8(a.data(), b.data(), n, from) == want);
  }
}

TEST_CASE("find_first_zero_bit: scalar, avx2 and the naive loop agree") {
  std::mt19937_64 g(4);
  for (int it = 0; it < 2000; ++it) {
    std::size_t words = 1 + g() % 20;
    std::vector<std::uint64_t> w(words, ~std::uint64_t{0});
    for (int k = static_cast<int>(g() % 3); k-- > 0;) w[g() % words] &= ~(std::uint64_t{1} << (g() % 64));
    if (g() % 4 == 0) w[g() % words] = g();
    std::size_t nbits = words * 64 - g() % 64;
    std::size_t from = g() % (nbits + 1);
    auto want = ref_zero_bit(w, nbits, from);
    CHECK(scalar::find_first_zero_bit(w.data(), nbits, from) == want);
    if (avx2::available()) CHECK(avx2::find_first_zero_bit(w.data(), nbits, from) == want);
    CHECK(find_first_zero_bit(w.data(), nbits, from) == want);
  }
}

TEST_CASE("popcount: scalar, avx2 and the naive loop agree") {
  std::mt19937_64 g(5);
  for (int it = 0; it < 500; ++it) {
    std::vector<std::uint64_t> w(g() % 70);
    for (auto& x : w) x = g() & g();
    auto want = ref_popcount(w);
    CHECK(scalar::popcount(w.data(), w.size()) == want);
    if (avx2::available()) CHECK(avx2::popcount(w.data(), w.size()) == want);
    CHECK(popcount(w.data(), w.size()) == want);
  }
}

TEST_CASE("edge sizes") {
  std::vector<std::uint64_t> w(4, ~std::uint64_t{0});
  CHECK(find_first_zero_bit(w.data(), 256) == 256);
  CHECK(find_first_zero_bit(w.data(), 0) == 0);
  w[3] = 0;
  CHECK(find_first_zero_bit(w.data(), 256, 10) == 192);
  std::uint8_t a[1] = {1}, b[1] = {1};
  CHECK(first_mismatch_u8(a, b, 0) == 0);
  CHECK(first_mismatch_u8(a, b, 1) == 1);
}
