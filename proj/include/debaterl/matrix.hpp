#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace debaterl {

// Row-major matrix. Production code uses the float32 alias below; the
// double instantiation exists so test oracles can probe the same code
// path without rounding noise.
template <typename T>
struct MatrixT {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  MatrixT() = default;
  MatrixT(std::size_t r, std::size_t c, T fill = T(0))
      : rows(r), cols(c), data(r * c, fill) {}

  T& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  T at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const MatrixT& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

using Matrix = MatrixT<float>;

template <typename T, typename U>
MatrixT<T> matrix_cast(const MatrixT<U>& m) {
  MatrixT<T> out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.size(); ++i) out.data[i] = T(m.data[i]);
  return out;
}

// Deterministic RNG used everywhere; seeds are derived, never shared.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }
  // Derive an independent stream for a sub-task.
  Rng derive(std::uint64_t salt) {
    return Rng(gen_() ^ (salt * 0x9e3779b97f4a7c15ULL + 0x85ebca6bULL));
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }
  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(gen_);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), gen_);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

template <typename T>
MatrixT<T> matmul(const MatrixT<T>& a, const MatrixT<T>& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  MatrixT<T> out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const T aik = a.at(i, k);
      if (aik == T(0)) continue;
      const T* brow = &b.data[k * b.cols];
      T* orow = &out.data[i * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

// out = a * b^T
template <typename T>
MatrixT<T> matmul_bt(const MatrixT<T>& a, const MatrixT<T>& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_bt: shape mismatch");
  MatrixT<T> out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k)
        acc += double(a.at(i, k)) * double(b.at(j, k));
      out.at(i, j) = T(acc);
    }
  return out;
}

// out = a^T * b
template <typename T>
MatrixT<T> matmul_at(const MatrixT<T>& a, const MatrixT<T>& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_at: shape mismatch");
  MatrixT<T> out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k)
    for (std::size_t i = 0; i < a.cols; ++i) {
      const T aki = a.at(k, i);
      if (aki == T(0)) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        out.at(i, j) += aki * b.at(k, j);
    }
  return out;
}

}  // namespace debaterl
