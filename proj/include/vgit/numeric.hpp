#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace vgit {

using Int = long long;
using Vec = std::vector<Int>;
using Mask = std::uint32_t;
using Q = boost::multiprecision::cpp_rational;

constexpr int kMaxCoords = 16;

inline int popcount(Mask m) { return std::popcount(m); }
inline bool is_subset(Mask a, Mask b) { return (a & ~b) == 0; }
inline bool has_bit(Mask m, int i) { return (m >> i) & 1u; }
inline Mask full_mask(int n) { return n >= 32 ? ~Mask(0) : ((Mask(1) << n) - 1); }

inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (int i = 0; m; ++i, m >>= 1)
    if (m & 1u) out.push_back(i);
  return out;
}

// floor division for signed integers
inline Int floor_div(Int a, Int b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Int gcd_abs(Int a, Int b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline bool is_integer(const Q& q) { return boost::multiprecision::denominator(q) == 1; }

inline Q floor_q(const Q& q) {
  using boost::multiprecision::cpp_int;
  cpp_int n = boost::multiprecision::numerator(q);
  cpp_int d = boost::multiprecision::denominator(q);
  cpp_int f = n / d;
  if (n % d != 0 && n < 0) f -= 1;
  return Q(f);
}

inline Int to_int(const Q& q) {
  if (!is_integer(q)) throw std::domain_error("rational is not an integer");
  return boost::multiprecision::numerator(q).convert_to<Int>();
}

// Accepts "7", "-3/2", "0.5", "-1.25".
inline Q parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty number");
  auto slash = s.find('/');
  auto dot = s.find('.');
  auto int_ok = [](const std::string& t, bool allow_sign) {
    if (t.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (t[0] == '-' || t[0] == '+')) i = 1;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  using boost::multiprecision::cpp_int;
  if (slash != std::string::npos) {
    std::string a = s.substr(0, slash), b = s.substr(slash + 1);
    if (!int_ok(a, true) || !int_ok(b, false)) throw std::invalid_argument("bad rational: " + s);
    cpp_int den(b);
    if (den == 0) throw std::invalid_argument("zero denominator: " + s);
    return Q(cpp_int(a), den);
  }
  if (dot != std::string::npos) {
    std::string a = s.substr(0, dot), b = s.substr(dot + 1);
    bool neg = !a.empty() && a[0] == '-';
    std::string digits = (a == "-" || a == "+" || a.empty()) ? "0" : a;
    if (!int_ok(digits, true) || !int_ok(b, false)) throw std::invalid_argument("bad decimal: " + s);
    cpp_int whole(digits);
    if (whole < 0) whole = -whole;
    cpp_int scale = 1;
    for (std::size_t i = 0; i < b.size(); ++i) scale *= 10;
    Q v = Q(whole) + Q(cpp_int(b), scale);
    return neg ? Q(-v) : v;
  }
  if (!int_ok(s, true)) throw std::invalid_argument("bad integer: " + s);
  return Q(cpp_int(s));
}

// Fixed-point text with `places` decimals, rounded half away from zero.
inline std::string format_fixed(const Q& q, int places) {
  using boost::multiprecision::cpp_int;
  cpp_int scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  Q scaled = q * Q(scale);
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  cpp_int n = boost::multiprecision::numerator(scaled);
  cpp_int d = boost::multiprecision::denominator(scaled);
  cpp_int r = (2 * n + d) / (2 * d);
  std::string digits = r.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places))
      digits = std::string(places + 1 - digits.size(), '0') + digits;
    digits.insert(digits.size() - places, ".");
  }
  if (neg && r != 0) digits = "-" + digits;
  return digits;
}

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Q> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  Q& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Q& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  bool is_zero() const {
    for (const auto& x : a)
      if (x != 0) return false;
    return true;
  }
  bool operator==(const Matrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

inline Matrix operator*(const Matrix& x, const Matrix& y) {
  if (x.cols != y.rows) throw std::invalid_argument("matrix shape mismatch");
  Matrix z(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      const Q& xik = x(i, k);
      if (xik == 0) continue;
      for (std::size_t j = 0; j < y.cols; ++j)
        if (y(k, j) != 0) z(i, j) += xik * y(k, j);
    }
  return z;
}

inline Matrix operator+(const Matrix& x, const Matrix& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("matrix shape mismatch");
  Matrix z = x;
  for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] += y.a[i];
  return z;
}

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(Matrix& m) {
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    std::size_t p = r;
    while (p < m.rows && m(p, c) == 0) ++p;
    if (p == m.rows) continue;
    if (p != r)
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(p, j), m(r, j));
    Q inv = Q(1) / m(r, c);
    for (std::size_t j = c; j < m.cols; ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == r || m(i, c) == 0) continue;
      Q f = m(i, c);
      for (std::size_t j = c; j < m.cols; ++j)
        if (m(r, j) != 0) m(i, j) -= f * m(r, j);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

inline std::size_t rank(Matrix m) {
  if (m.rows == 0 || m.cols == 0) return 0;
  return rref(m).size();
}

// Columns of the returned matrix span the kernel.
inline Matrix nullspace(Matrix m) {
  auto piv = rref(m);
  std::vector<bool> is_piv(m.cols, false);
  for (auto c : piv) is_piv[c] = true;
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < m.cols; ++c)
    if (!is_piv[c]) free.push_back(c);
  Matrix k(m.cols, free.size());
  for (std::size_t f = 0; f < free.size(); ++f) {
    k(free[f], f) = 1;
    for (std::size_t r = 0; r < piv.size(); ++r) k(piv[r], f) = -m(r, free[f]);
  }
  return k;
}

// Some solution of A x = b, or nullopt.
inline std::optional<std::vector<Q>> solve(const Matrix& A, const std::vector<Q>& b) {
  if (b.size() != A.rows) throw std::invalid_argument("rhs size mismatch");
  Matrix aug(A.rows, A.cols + 1);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = 0; j < A.cols; ++j) aug(i, j) = A(i, j);
    aug(i, A.cols) = b[i];
  }
  auto piv = rref(aug);
  std::vector<Q> x(A.cols);
  for (std::size_t r = 0; r < piv.size(); ++r) {
    if (piv[r] == A.cols) return std::nullopt;
    x[piv[r]] = aug(r, A.cols);
  }
  return x;
}

}  // namespace vgit
