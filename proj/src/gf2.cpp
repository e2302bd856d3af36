#include "phgm/gf2.hpp"

#include <bit>
#include <string>

#include "phgm/error.hpp"

namespace phgm::gf2 {

BitVector BitVector::from_bools(const std::vector<int>& bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) v.set(i);
  return v;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.size_ != size_) fail(Errc::shape_mismatch, "bit vector length mismatch");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  return *this;
}

bool BitVector::any() const {
  for (auto w : words_)
    if (w) return true;
  return false;
}

std::size_t BitVector::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<std::size_t> BitVector::ones() const {
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t word = words_[w];
    while (word) {
      out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
      word &= word - 1;
    }
  }
  return out;
}

Matrix::Matrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVector(cols)) {}

Matrix Matrix::from_rows(const std::vector<std::vector<int>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) fail(Errc::shape_mismatch, "ragged GF(2) matrix rows");
    for (std::size_t c = 0; c < cols; ++c)
      if (rows[r][c]) m.set(r, c);
  }
  return m;
}

BitVector Matrix::multiply(const BitVector& x) const {
  if (x.size() != cols_) fail(Errc::shape_mismatch, "GF(2) multiply: x has wrong length");
  BitVector out(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& a = rows_[r].words();
    const auto& b = x.words();
    std::uint64_t parity = 0;
    for (std::size_t w = 0; w < a.size(); ++w) parity ^= a[w] & b[w];
    if (std::popcount(parity) & 1) out.set(r);
  }
  return out;
}

std::size_t rank(const Matrix& a) {
  std::vector<BitVector> rows;
  rows.reserve(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) rows.push_back(a.row(r));
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < a.cols() && pivot_row < rows.size(); ++c) {
    std::size_t sel = pivot_row;
    while (sel < rows.size() && !rows[sel].get(c)) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[sel], rows[pivot_row]);
    for (std::size_t r = pivot_row + 1; r < rows.size(); ++r)
      if (rows[r].get(c)) rows[r] ^= rows[pivot_row];
    ++pivot_row;
  }
  return pivot_row;
}

std::optional<BitVector> solve_forced(const Matrix& a, const BitVector& b, std::size_t forced) {
  if (forced >= a.cols()) fail(Errc::invalid_argument, "forced column out of range");
  if (b.size() != a.rows()) fail(Errc::shape_mismatch, "right-hand side has wrong length");

  // Substitute x[forced] = 1: rhs' = b + A[:, forced], and exclude the forced
  // column from pivoting. Augmented rows carry the rhs in an extra bit.
  const std::size_t n = a.cols();
  std::vector<BitVector> rows;
  rows.reserve(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    BitVector aug(n + 1);
    for (auto c : a.row(r).ones())
      if (c != forced) aug.set(c);
    if (b.get(r) != a.get(r, forced)) aug.set(n);
    rows.push_back(std::move(aug));
  }

  std::vector<std::size_t> pivot_cols;
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < n && pivot_row < rows.size(); ++c) {
    if (c == forced) continue;
    std::size_t sel = pivot_row;
    while (sel < rows.size() && !rows[sel].get(c)) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[sel], rows[pivot_row]);
    // Full (reduced) elimination so back-substitution is a read-off.
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != pivot_row && rows[r].get(c)) rows[r] ^= rows[pivot_row];
    pivot_cols.push_back(c);
    ++pivot_row;
  }
  for (std::size_t r = pivot_row; r < rows.size(); ++r)
    if (rows[r].get(n)) return std::nullopt;

  BitVector x(n);
  x.set(forced);
  for (std::size_t r = 0; r < pivot_cols.size(); ++r)
    if (rows[r].get(n)) x.set(pivot_cols[r]);
  return x;
}

bool verify(const Matrix& a, const BitVector& x, const BitVector& b) {
  if (b.size() != a.rows()) fail(Errc::shape_mismatch, "right-hand side has wrong length");
  return a.multiply(x) == b;
}

}  // namespace phgm::gf2
