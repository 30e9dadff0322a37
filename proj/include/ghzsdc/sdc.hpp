// n-GHZ basis, the superdense-coding encoder and GHZ-basis decoding.
//
// Qubit 0 is Bob's (the distributed qubit); qubits 1..n-1 stay with Alice and
// carry the encoding.
#pragma once

#include "ghzsdc/qcore.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ghzsdc::sdc {

inline constexpr int kMinGhzQubits = 2;
inline constexpr int kMaxGhzQubits = kMaxStateQubits;

/// The n-bit value X = x_{n-1} ... x_0 carried by one superdense-coding use.
class Codeword {
 public:
  Codeword(int n, std::uint64_t value) : n_(n), value_(value) {
    if (n < 1 || n > 62) throw std::invalid_argument("codeword width out of range");
    if (value >= (std::uint64_t{1} << n)) {
      throw std::invalid_argument("codeword value " + std::to_string(value) + " does not fit in " +
                                  std::to_string(n) + " bits");
    }
  }

  int n() const { return n_; }
  std::uint64_t value() const { return value_; }

  /// x_k, k = 0 is the least significant bit.
  int bit(int k) const { return static_cast<int>((value_ >> k) & 1U); }

  /// y_k of floor(X / 2) = y_{n-2} ... y_0.
  int shifted_bit(int k) const { return static_cast<int>(((value_ >> 1) >> k) & 1U); }

  std::string to_string() const {
    std::string s;
    for (int k = n_ - 1; k >= 0; --k) s.push_back(bit(k) ? '1' : '0');
    return s;
  }

 private:
  int n_;
  std::uint64_t value_;
};

class GhzBasis {
 public:
  explicit GhzBasis(int n) : n_(n) {
    if (n < kMinGhzQubits || n > kMaxGhzQubits) {
      throw std::invalid_argument("GHZ basis size n must lie in [" + std::to_string(kMinGhzQubits) + ", " +
                                  std::to_string(kMaxGhzQubits) + "]");
    }
    const std::size_t dim = std::size_t{1} << n;
    states_.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) states_.push_back(make_state(i));
  }

  int n() const { return n_; }
  std::size_t size() const { return states_.size(); }

  /// 0-based: state(0) is (|0...0> + |1...1>)/sqrt 2.
  const StateVector& state(std::size_t index) const { return states_.at(index); }
  const std::vector<StateVector>& states() const { return states_; }

  /// Basis labels sharing the state's support: the pattern with leading bit 0 and its complement.
  std::pair<std::size_t, std::size_t> support(std::size_t index) const {
    const std::size_t pattern = index / 2;
    return {pattern, ((std::size_t{1} << n_) - 1) ^ pattern};
  }

  /// +1 for odd-numbered (1-based) members, -1 for even-numbered ones.
  int relative_sign(std::size_t index) const { return index % 2 == 0 ? 1 : -1; }

 private:
  StateVector make_state(std::size_t index) const {
    const auto [low, high] = support(index);
    Vector v = Vector::Zero(Eigen::Index{1} << n_);
    const double s = 1.0 / std::sqrt(2.0);
    v(static_cast<Eigen::Index>(low)) = s;
    v(static_cast<Eigen::Index>(high)) = relative_sign(index) * s;
    return StateVector(std::move(v));
  }

  int n_;
  std::vector<StateVector> states_;
};

inline GhzBasis ghz_basis(int n) { return GhzBasis(n); }

/// (|0...0> + |1...1>)/sqrt 2 on n qubits.
inline StateVector ghz_state(int n) { return GhzBasis(n).state(0); }

/// The (n-1)-qubit encoder for codeword X. The first factor (Alice's first qubit)
/// is chosen by (x_0, x_{n-1}); factor m = 1..n-2 is sigma_x^(y_{n-2-m}).
inline Unitary encode_usdc(const Codeword& code) {
  const int n = code.n();
  if (n < 3) throw std::invalid_argument("encode_usdc requires n >= 3");

  const int x0 = code.bit(0);
  const int xh = code.bit(n - 1);
  Matrix head;
  if (x0 == 0 && xh == 0) {
    head = gates::identity();
  } else if (x0 == 0) {
    head = gates::pauli_x();
  } else if (xh == 0) {
    head = gates::pauli_z();
  } else {
    head = cplx(0, -1) * gates::pauli_y();
  }

  Matrix op = head;
  for (int m = 1; m <= n - 2; ++m) {
    const int y = code.shifted_bit(n - 2 - m);
    op = kron(op, y ? gates::pauli_x() : gates::identity());
  }
  return Unitary(std::move(op));
}

/// The ideal state Bob receives for `code` from a clean pre-shared |Psi_1>.
inline StateVector encoded_target(const Codeword& code) {
  const int n = code.n();
  std::vector<int> alice(static_cast<std::size_t>(n - 1));
  for (int q = 1; q < n; ++q) alice[static_cast<std::size_t>(q - 1)] = q;
  return apply_unitary(ghz_state(n), encode_usdc(code), alice);
}

/// Probabilities of each GHZ-basis outcome; entry i is <Psi_{i+1}|rho|Psi_{i+1}>.
inline std::vector<double> decode_ghz(const DensityOperator& rho, int n) {
  if (rho.qubit_count() != n) {
    throw std::invalid_argument("decode_ghz: state has " + std::to_string(rho.qubit_count()) + " qubits, expected " +
                                std::to_string(n));
  }
  const GhzBasis basis(n);
  std::vector<double> dist(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [lo, hi] = basis.support(i);
    const auto a = static_cast<Eigen::Index>(lo);
    const auto b = static_cast<Eigen::Index>(hi);
    const double v = 0.5 * (rho(a, a).real() + rho(b, b).real()) + basis.relative_sign(i) * rho(a, b).real();
    dist[i] = std::max(0.0, v);
  }
  return dist;
}

/// Index of the GHZ-basis member that equals `psi` up to a global phase, or -1.
inline int ghz_index_of(const StateVector& psi, double tol = 1e-9) {
  const GhzBasis basis(psi.qubit_count());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double ov = std::abs(basis.state(i).amplitudes().dot(psi.amplitudes()));
    if (std::abs(ov - 1.0) < tol) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace ghzsdc::sdc
