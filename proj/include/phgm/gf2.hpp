#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace phgm::gf2 {

// Bit vector packed into 64-bit words; bits past size() are always zero.
class BitVector {
public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  static BitVector from_bools(const std::vector<int>& bits);

  std::size_t size() const { return size_; }
  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v = true) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) words_[i >> 6] |= mask; else words_[i >> 6] &= ~mask;
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  BitVector& operator^=(const BitVector& other);
  bool any() const;
  std::size_t count() const;
  std::vector<std::size_t> ones() const;

  const std::vector<std::uint64_t>& words() const { return words_; }
  bool operator==(const BitVector&) const = default;

private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

class Matrix {
public:
  Matrix(std::size_t rows, std::size_t cols);
  static Matrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
  void set(std::size_t r, std::size_t c, bool v = true) { rows_[r].set(c, v); }
  const BitVector& row(std::size_t r) const { return rows_[r]; }

  // A x over GF(2).
  BitVector multiply(const BitVector& x) const;

private:
  std::size_t cols_;
  std::vector<BitVector> rows_;
};

std::size_t rank(const Matrix& a);

// Solves A x = b (mod 2) subject to x[forced] = 1. Free variables are set to
// zero, so the answer is deterministic and usually sparse. Column order is
// taken as given. Returns nullopt when no such x exists.
std::optional<BitVector> solve_forced(const Matrix& a, const BitVector& b, std::size_t forced);

bool verify(const Matrix& a, const BitVector& x, const BitVector& b);

}  // namespace phgm::gf2
