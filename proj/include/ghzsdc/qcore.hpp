// Dense state-vector and density-matrix primitives.
//
// Basis convention: qubit 0 is the most significant bit of a basis index,
// so |q0 q1 ... q(m-1)> maps to sum_k q_k * 2^(m-1-k).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghzsdc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxStateQubits = 12;
inline constexpr int kMaxDensityQubits = 10;
inline constexpr double kStateTol = 1e-10;
inline constexpr double kEigenFloor = 1e-12;

namespace detail {

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline int log2_exact(std::size_t v) {
  if (!is_power_of_two(v)) {
    throw std::invalid_argument("dimension " + std::to_string(v) + " is not a power of two");
  }
  int k = 0;
  while ((std::size_t{1} << k) < v) ++k;
  return k;
}

inline void check_targets(std::span<const int> targets, int width, int qubits) {
  if (static_cast<int>(targets.size()) != width) {
    throw std::invalid_argument("operator acts on " + std::to_string(width) + " qubits but " +
                                std::to_string(targets.size()) + " targets given");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= qubits) {
      throw std::out_of_range("target qubit " + std::to_string(targets[i]) + " out of range for " +
                              std::to_string(qubits) + " qubits");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) {
        throw std::invalid_argument("repeated target qubit " + std::to_string(targets[i]));
      }
    }
  }
}

/// Applies a 2^k x 2^k operator to `targets` of an m-qubit amplitude buffer in place.
/// targets[0] is the operator's most significant local qubit.
inline void apply_local(cplx* amps, int qubits, const Matrix& op, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::size_t local = std::size_t{1} << k;
  const std::size_t total = std::size_t{1} << qubits;

  std::vector<std::size_t> offsets(local, 0);
  std::size_t target_mask = 0;
  for (std::size_t l = 0; l < local; ++l) {
    for (int t = 0; t < k; ++t) {
      if ((l >> (k - 1 - t)) & 1U) offsets[l] |= std::size_t{1} << (qubits - 1 - targets[t]);
    }
  }
  for (int t = 0; t < k; ++t) target_mask |= std::size_t{1} << (qubits - 1 - targets[t]);

  std::vector<cplx> in(local), out(local);
  for (std::size_t base = 0; base < total; ++base) {
    if (base & target_mask) continue;
    for (std::size_t l = 0; l < local; ++l) in[l] = amps[base | offsets[l]];
    for (std::size_t r = 0; r < local; ++r) {
      cplx acc = 0.0;
      for (std::size_t c = 0; c < local; ++c) acc += op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      out[r] = acc;
    }
    for (std::size_t l = 0; l < local; ++l) amps[base | offsets[l]] = out[l];
  }
}

/// Returns op_embedded * rho * op_embedded^dagger without forming the embedding.
inline Matrix conjugate_local(const Matrix& rho, int qubits, const Matrix& op, std::span<const int> targets) {
  Matrix left = rho;
  for (Eigen::Index c = 0; c < left.cols(); ++c) apply_local(left.col(c).data(), qubits, op, targets);
  Matrix right = left.adjoint();
  for (Eigen::Index c = 0; c < right.cols(); ++c) apply_local(right.col(c).data(), qubits, op, targets);
  return right.adjoint();
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  return solver.eigenvalues();
}

}  // namespace detail

class StateVector {
 public:
  explicit StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
    qubits_ = detail::log2_exact(static_cast<std::size_t>(amps_.size()));
    if (qubits_ > kMaxStateQubits) {
      throw std::invalid_argument("state vectors are limited to " + std::to_string(kMaxStateQubits) + " qubits");
    }
    const double norm2 = amps_.squaredNorm();
    if (std::abs(norm2 - 1.0) > kStateTol) {
      throw std::invalid_argument("state vector is not normalized (norm^2 = " + std::to_string(norm2) + ")");
    }
  }

  static StateVector basis(int qubits, std::size_t index) {
    Vector v = Vector::Zero(Eigen::Index{1} << qubits);
    if (index >= static_cast<std::size_t>(v.size())) throw std::out_of_range("basis index out of range");
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v));
  }

  /// Normalizes `v` first; rejects the zero vector.
  static StateVector normalized(Vector v) {
    const double n = v.norm();
    if (n < 1e-300) throw std::invalid_argument("cannot normalize a zero vector");
    return StateVector(v / n);
  }

  const Vector& amplitudes() const { return amps_; }
  int qubit_count() const { return qubits_; }
  Eigen::Index dim() const { return amps_.size(); }
  cplx operator[](Eigen::Index i) const { return amps_(i); }

 private:
  Vector amps_;
  int qubits_ = 0;
};

class DensityOperator {
 public:
  struct Unchecked {};

  /// Validates Hermiticity, unit trace and positivity.
  explicit DensityOperator(Matrix m) : DensityOperator(std::move(m), Unchecked{}) {
    validate_or_throw(mat_);
  }

  /// For results of trace-preserving maps on valid inputs; only the shape is checked.
  DensityOperator(Matrix m, Unchecked) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols()) throw std::invalid_argument("density matrix must be square");
    qubits_ = detail::log2_exact(static_cast<std::size_t>(mat_.rows()));
    if (qubits_ > kMaxDensityQubits) {
      throw std::invalid_argument("density operators are limited to " + std::to_string(kMaxDensityQubits) + " qubits");
    }
  }

  static DensityOperator pure(const StateVector& psi) {
    return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint(), Unchecked{});
  }

  static DensityOperator maximally_mixed(int qubits) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    return DensityOperator(Matrix::Identity(d, d) / static_cast<double>(d), Unchecked{});
  }

  static std::optional<std::string> validation_error(const Matrix& m, double tol = kStateTol) {
    if (m.rows() != m.cols()) return "matrix is not square";
    if (detail::max_abs(m - m.adjoint()) > tol) return "matrix is not Hermitian";
    if (std::abs(m.trace() - cplx{1.0}) > tol) return "trace is not 1";
    const Eigen::VectorXd ev = detail::hermitian_eigenvalues(m);
    if (ev.size() > 0 && ev.minCoeff() < -tol) return "matrix has a negative eigenvalue";
    return std::nullopt;
  }

  static bool is_valid(const Matrix& m, double tol = kStateTol) { return !validation_error(m, tol); }

  const Matrix& matrix() const { return mat_; }
  int qubit_count() const { return qubits_; }
  Eigen::Index dim() const { return mat_.rows(); }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return mat_(r, c); }

  /// Ascending eigenvalues; deterministic for a fixed input.
  Eigen::VectorXd eigenvalues() const { return detail::hermitian_eigenvalues(mat_); }

  double purity() const { return (mat_ * mat_).trace().real(); }

 private:
  static void validate_or_throw(const Matrix& m) {
    if (auto err = validation_error(m)) throw std::invalid_argument("invalid density operator: " + *err);
  }

  Matrix mat_;
  int qubits_ = 0;
};

class Unitary {
 public:
  explicit Unitary(Matrix m, double tol = kStateTol) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols()) throw std::invalid_argument("unitary must be square");
    qubits_ = detail::log2_exact(static_cast<std::size_t>(mat_.rows()));
    const Matrix err = mat_ * mat_.adjoint() - Matrix::Identity(mat_.rows(), mat_.cols());
    if (detail::max_abs(err) > tol) throw std::invalid_argument("matrix is not unitary");
  }

  static Unitary identity(int qubits) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    return Unitary(Matrix::Identity(d, d));
  }

  const Matrix& matrix() const { return mat_; }
  int qubit_count() const { return qubits_; }
  Eigen::Index dim() const { return mat_.rows(); }
  Unitary adjoint() const { return Unitary(mat_.adjoint()); }

  friend Unitary operator*(const Unitary& a, const Unitary& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("unitary product dimension mismatch");
    return Unitary(a.mat_ * b.mat_, 1e-9);
  }

 private:
  Matrix mat_;
  int qubits_ = 0;
};

class QuantumChannel {
 public:
  explicit QuantumChannel(std::vector<Matrix> kraus, double tol = kStateTol) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
    const Eigen::Index d = kraus_.front().rows();
    qubits_ = detail::log2_exact(static_cast<std::size_t>(d));
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& k : kraus_) {
      if (k.rows() != d || k.cols() != d) throw std::invalid_argument("Kraus operators must share one square shape");
      sum += k.adjoint() * k;
    }
    if (detail::max_abs(sum - Matrix::Identity(d, d)) > tol) {
      throw std::invalid_argument("Kraus operators violate completeness");
    }
  }

  static QuantumChannel identity(int qubits) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    return QuantumChannel({Matrix::Identity(d, d)});
  }

  const std::vector<Matrix>& kraus_ops() const { return kraus_; }
  int qubit_count() const { return qubits_; }

 private:
  std::vector<Matrix> kraus_;
  int qubits_ = 0;
};

struct MeasurementOutcome {
  std::size_t outcome_index = 0;
  double probability = 0.0;
  // Empty when the outcome probability is below 1e-12.
  std::optional<DensityOperator> post_state;
};

namespace gates {

inline Matrix identity() { return Matrix::Identity(2, 2); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix hadamard() {
  Matrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

/// Control on the high qubit, target on the low qubit.
inline Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

inline Matrix swap() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return m;
}

}  // namespace gates

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// `a` occupies the high (left) qubits, `b` the low (right) ones.
inline StateVector tensor_product(const StateVector& a, const StateVector& b) {
  return StateVector(kron(a.amplitudes(), b.amplitudes()));
}

inline DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(kron(a.matrix(), b.matrix()), DensityOperator::Unchecked{});
}

inline Unitary tensor_product(const Unitary& a, const Unitary& b) {
  return Unitary(kron(a.matrix(), b.matrix()));
}

/// Kept qubits appear in ascending index order in the result.
inline DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> keep) {
  const int m = rho.qubit_count();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw std::invalid_argument("partial_trace: repeated qubit in keep set");
  }
  if (kept.front() < 0 || kept.back() >= m) throw std::out_of_range("partial_trace: keep index out of range");

  std::vector<int> traced;
  for (int q = 0; q < m; ++q) {
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);
  }

  auto scatter = [m](std::size_t local, const std::vector<int>& qs) {
    std::size_t idx = 0;
    const int k = static_cast<int>(qs.size());
    for (int t = 0; t < k; ++t) {
      if ((local >> (k - 1 - t)) & 1U) idx |= std::size_t{1} << (m - 1 - qs[t]);
    }
    return idx;
  };

  const std::size_t dk = std::size_t{1} << kept.size();
  const std::size_t dt = std::size_t{1} << traced.size();
  std::vector<std::size_t> kidx(dk), tidx(dt);
  for (std::size_t i = 0; i < dk; ++i) kidx[i] = scatter(i, kept);
  for (std::size_t i = 0; i < dt; ++i) tidx[i] = scatter(i, traced);

  const Matrix& src = rho.matrix();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t r = 0; r < dk; ++r) {
    for (std::size_t c = 0; c < dk; ++c) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t) {
        acc += src(static_cast<Eigen::Index>(kidx[r] | tidx[t]), static_cast<Eigen::Index>(kidx[c] | tidx[t]));
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return DensityOperator(std::move(out), DensityOperator::Unchecked{});
}

inline DensityOperator partial_trace(const DensityOperator& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

inline DensityOperator apply_unitary(const DensityOperator& rho, const Unitary& u, std::span<const int> targets) {
  detail::check_targets(targets, u.qubit_count(), rho.qubit_count());
  return DensityOperator(detail::conjugate_local(rho.matrix(), rho.qubit_count(), u.matrix(), targets),
                         DensityOperator::Unchecked{});
}

inline DensityOperator apply_unitary(const DensityOperator& rho, const Unitary& u, std::initializer_list<int> targets) {
  return apply_unitary(rho, u, std::span<const int>(targets.begin(), targets.size()));
}

inline StateVector apply_unitary(const StateVector& psi, const Unitary& u, std::span<const int> targets) {
  detail::check_targets(targets, u.qubit_count(), psi.qubit_count());
  Vector amps = psi.amplitudes();
  detail::apply_local(amps.data(), psi.qubit_count(), u.matrix(), targets);
  return StateVector::normalized(std::move(amps));
}

inline StateVector apply_unitary(const StateVector& psi, const Unitary& u, std::initializer_list<int> targets) {
  return apply_unitary(psi, u, std::span<const int>(targets.begin(), targets.size()));
}

inline DensityOperator apply_channel(const DensityOperator& rho, const QuantumChannel& ch,
                                     std::span<const int> targets) {
  detail::check_targets(targets, ch.qubit_count(), rho.qubit_count());
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (const auto& k : ch.kraus_ops()) out += detail::conjugate_local(rho.matrix(), rho.qubit_count(), k, targets);
  return DensityOperator(std::move(out), DensityOperator::Unchecked{});
}

inline DensityOperator apply_channel(const DensityOperator& rho, const QuantumChannel& ch,
                                     std::initializer_list<int> targets) {
  return apply_channel(rho, ch, std::span<const int>(targets.begin(), targets.size()));
}

/// One outcome per bit string over `targets` (targets[0] is the outcome's high bit).
/// Post-states live on the unmeasured qubits, in ascending index order.
inline std::vector<MeasurementOutcome> measure_computational(const DensityOperator& rho,
                                                             std::span<const int> targets) {
  const int m = rho.qubit_count();
  detail::check_targets(targets, static_cast<int>(targets.size()), m);

  std::vector<int> rest;
  for (int q = 0; q < m; ++q) {
    if (std::find(targets.begin(), targets.end(), q) == targets.end()) rest.push_back(q);
  }
  auto scatter = [m](std::size_t local, std::span<const int> qs) {
    std::size_t idx = 0;
    const int k = static_cast<int>(qs.size());
    for (int t = 0; t < k; ++t) {
      if ((local >> (k - 1 - t)) & 1U) idx |= std::size_t{1} << (m - 1 - qs[t]);
    }
    return idx;
  };

  const std::size_t dout = std::size_t{1} << targets.size();
  const std::size_t drest = std::size_t{1} << rest.size();
  std::vector<std::size_t> ridx(drest);
  for (std::size_t i = 0; i < drest; ++i) ridx[i] = scatter(i, rest);

  std::vector<MeasurementOutcome> outcomes;
  outcomes.reserve(dout);
  for (std::size_t o = 0; o < dout; ++o) {
    const std::size_t base = scatter(o, targets);
    Matrix block(static_cast<Eigen::Index>(drest), static_cast<Eigen::Index>(drest));
    for (std::size_t r = 0; r < drest; ++r) {
      for (std::size_t c = 0; c < drest; ++c) {
        block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            rho(static_cast<Eigen::Index>(base | ridx[r]), static_cast<Eigen::Index>(base | ridx[c]));
      }
    }
    MeasurementOutcome out;
    out.outcome_index = o;
    out.probability = std::max(0.0, block.trace().real());
    if (out.probability >= kEigenFloor) {
      out.post_state.emplace(block / out.probability, DensityOperator::Unchecked{});
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

inline std::vector<MeasurementOutcome> measure_computational(const DensityOperator& rho,
                                                             std::initializer_list<int> targets) {
  return measure_computational(rho, std::span<const int>(targets.begin(), targets.size()));
}

/// <psi|rho|psi>, the squared-overlap form.
inline double overlap(const StateVector& psi, const DensityOperator& rho) {
  if (psi.dim() != rho.dim()) throw std::invalid_argument("overlap: dimension mismatch");
  return (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
}

/// sqrt(<psi|rho|psi>), clamped to [0, 1].
inline double fidelity(const StateVector& psi, const DensityOperator& rho) {
  if (psi.dim() != rho.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const double v = overlap(psi, rho);
  return std::sqrt(std::clamp(v, 0.0, 1.0));
}

/// Entropy in bits of a Hermitian PSD matrix; eigenvalues below 1e-12 contribute nothing.
/// Eigenvalues more negative than `negative_tol` indicate an invalid state.
inline double entropy_bits(const Matrix& hermitian, double negative_tol = 1e-9) {
  const Eigen::VectorXd ev = detail::hermitian_eigenvalues(hermitian);
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double l = ev(i);
    if (l < -negative_tol) throw std::domain_error("entropy of a matrix with eigenvalue " + std::to_string(l));
    if (l > kEigenFloor) s -= l * std::log2(l);
  }
  return std::max(0.0, s);
}

inline double von_neumann_entropy(const DensityOperator& rho) {
  return std::min(entropy_bits(rho.matrix()), static_cast<double>(rho.qubit_count()));
}

}  // namespace ghzsdc
