// Holevo quantity, classical capacity, entropy exchange, coherent information
// and quantum capacity. All entropies are in bits.
#pragma once

#include "ghzsdc/qcore.hpp"

#include <functional>
#include <numeric>
#include <optional>
#include <vector>

namespace ghzsdc::capacity {

struct EnsembleSpec {
  std::vector<double> priors;
  std::vector<DensityOperator> states;

  void validate() const {
    if (priors.size() != states.size()) throw std::invalid_argument("ensemble priors and states differ in length");
    if (states.empty()) throw std::invalid_argument("ensemble is empty");
    double sum = 0.0;
    for (double p : priors) {
      if (p < 0.0) throw std::invalid_argument("ensemble prior is negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10) throw std::invalid_argument("ensemble priors do not sum to 1");
    for (const auto& s : states) {
      if (s.dim() != states.front().dim()) throw std::invalid_argument("ensemble states differ in dimension");
    }
  }

  Matrix average() const {
    Matrix avg = Matrix::Zero(states.front().dim(), states.front().dim());
    for (std::size_t i = 0; i < states.size(); ++i) avg += priors[i] * states[i].matrix();
    return avg;
  }

  static EnsembleSpec uniform(std::vector<DensityOperator> states) {
    const std::size_t n = states.size();
    return {std::vector<double>(n, 1.0 / static_cast<double>(n)), std::move(states)};
  }
};

struct CapacityReport {
  double holevo = 0.0;
  double classical_capacity = 0.0;
  double entropy_exchange = 0.0;
  double coherent_information = 0.0;
  double quantum_capacity = 0.0;
};

enum class PriorMode { uniform, optimize };

inline double holevo(const EnsembleSpec& ens) {
  ens.validate();
  double s = entropy_bits(ens.average());
  for (std::size_t i = 0; i < ens.states.size(); ++i) {
    if (ens.priors[i] > 0.0) s -= ens.priors[i] * entropy_bits(ens.states[i].matrix());
  }
  return s < -1e-12 ? s : std::max(0.0, s);
}

/// Euclidean projection onto the probability simplex.
inline std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (auto& x : v) x = std::max(0.0, x - theta);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

struct SimplexOptimum {
  double value = 0.0;
  std::vector<double> priors;
  int iterations = 0;
  double uniform_value = 0.0;
  // Set when the ascent could not reach the uniform-prior value; the uniform value is reported instead.
  bool optimizer_regressed = false;
};

/// Projected gradient ascent from the uniform prior with a backtracking step.
inline SimplexOptimum maximize_on_simplex(std::size_t size, const std::function<double(const std::vector<double>&)>& f,
                                          const std::function<std::vector<double>(const std::vector<double>&)>& grad,
                                          double tol = 1e-7, int max_iters = 500) {
  SimplexOptimum out;
  out.priors.assign(size, 1.0 / static_cast<double>(size));
  out.uniform_value = f(out.priors);
  out.value = out.uniform_value;
  double step = 1.0;
  for (int it = 0; it < max_iters && step > 1e-12; ++it) {
    const auto g = grad(out.priors);
    std::vector<double> trial(size);
    for (std::size_t i = 0; i < size; ++i) trial[i] = out.priors[i] + step * g[i];
    trial = project_to_simplex(std::move(trial));
    const double v = f(trial);
    out.iterations = it + 1;
    if (v > out.value) {
      const double gain = v - out.value;
      out.priors = std::move(trial);
      out.value = v;
      step *= 1.5;
      if (gain < tol) break;
    } else {
      step *= 0.5;
    }
  }
  if (out.value < out.uniform_value - tol) {
    out.optimizer_regressed = true;
    out.value = out.uniform_value;
    out.priors.assign(size, 1.0 / static_cast<double>(size));
  }
  return out;
}

/// Holevo maximized over priors for fixed output states.
inline SimplexOptimum optimize_holevo(const std::vector<DensityOperator>& states, double tol = 1e-7) {
  const std::size_t n = states.size();
  std::vector<double> own(n);
  for (std::size_t i = 0; i < n; ++i) own[i] = entropy_bits(states[i].matrix());

  auto f = [&](const std::vector<double>& pri) { return holevo(EnsembleSpec{pri, states}); };
  auto grad = [&](const std::vector<double>& pri) {
    EnsembleSpec ens{pri, states};
    Eigen::SelfAdjointEigenSolver<Matrix> solver(ens.average());
    Eigen::VectorXd logs = solver.eigenvalues();
    for (Eigen::Index i = 0; i < logs.size(); ++i) logs(i) = std::log2(std::max(logs(i), 1e-15));
    const Matrix log_avg = solver.eigenvectors() * logs.asDiagonal() * solver.eigenvectors().adjoint();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = -(states[i].matrix() * log_avg).trace().real() - own[i];
    return g;
  };
  return maximize_on_simplex(n, f, grad, tol);
}

inline double classical_capacity(const std::vector<DensityOperator>& states, PriorMode mode = PriorMode::uniform) {
  if (states.empty()) throw std::invalid_argument("classical_capacity: empty state family");
  if (mode == PriorMode::uniform) return holevo(EnsembleSpec::uniform(states));
  return optimize_holevo(states).value;
}

/// Kraus operators of `ch` acting on `targets` of an m-qubit register, as full-width matrices.
inline QuantumChannel embed_channel(const QuantumChannel& ch, int qubits, std::span<const int> targets) {
  ghzsdc::detail::check_targets(targets, ch.qubit_count(), qubits);
  const Eigen::Index d = Eigen::Index{1} << qubits;
  std::vector<Matrix> ops;
  for (const auto& k : ch.kraus_ops()) {
    Matrix full = Matrix::Identity(d, d);
    for (Eigen::Index c = 0; c < d; ++c) ghzsdc::detail::apply_local(full.col(c).data(), qubits, k, targets);
    ops.push_back(std::move(full));
  }
  return QuantumChannel(std::move(ops), 1e-9);
}

inline QuantumChannel embed_channel(const QuantumChannel& ch, int qubits, std::initializer_list<int> targets) {
  return embed_channel(ch, qubits, std::span<const int>(targets.begin(), targets.size()));
}

/// Kraus list of `second` after `first`.
inline QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
  std::vector<Matrix> ops;
  for (const auto& b : second.kraus_ops()) {
    for (const auto& a : first.kraus_ops()) ops.push_back(b * a);
  }
  return QuantumChannel(std::move(ops), 1e-9);
}

namespace detail {

inline void require_pure(const EnsembleSpec& ens) {
  for (const auto& s : ens.states) {
    if (std::abs(s.purity() - 1.0) > 1e-9) throw std::invalid_argument("entropy exchange needs pure ensemble members");
  }
}

inline Matrix apply_kraus(const QuantumChannel& ch, const Matrix& x) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (const auto& k : ch.kraus_ops()) out += k * x * k.adjoint();
  return out;
}

}  // namespace detail

/// Entropy of sum_{k,l} N(|e_k><e_l|) (x) |conj e_k><conj e_l| sqrt(l_k l_l), where
/// l_k, e_k diagonalize the ensemble average. The reference side reduces to the input state.
inline double entropy_exchange(const EnsembleSpec& input, const QuantumChannel& ch) {
  input.validate();
  detail::require_pure(input);
  const Eigen::Index d = input.states.front().dim();
  if (Eigen::Index{1} << ch.qubit_count() != d) throw std::invalid_argument("channel dimension does not match states");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(input.average());
  std::vector<Eigen::Index> support;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (solver.eigenvalues()(k) > kEigenFloor) support.push_back(k);
  }
  Matrix joint = Matrix::Zero(d * d, d * d);
  for (Eigen::Index k : support) {
    const Vector ek = solver.eigenvectors().col(k);
    const double lk = solver.eigenvalues()(k);
    for (Eigen::Index l : support) {
      const Vector el = solver.eigenvectors().col(l);
      const double ll = solver.eigenvalues()(l);
      const Matrix sys = detail::apply_kraus(ch, ek * el.adjoint());
      const Matrix ref = ek.conjugate() * el.conjugate().adjoint();
      joint += std::sqrt(lk * ll) * kron(sys, ref);
    }
  }
  return entropy_bits(joint);
}

inline double coherent_information(const EnsembleSpec& input, const QuantumChannel& ch) {
  const double se = entropy_exchange(input, ch);
  const double out = entropy_bits(detail::apply_kraus(ch, input.average()));
  return out - se;
}

inline SimplexOptimum optimize_coherent_information(const std::vector<DensityOperator>& inputs,
                                                    const QuantumChannel& ch, double tol = 1e-7) {
  const std::size_t n = inputs.size();
  auto f = [&](const std::vector<double>& pri) { return coherent_information(EnsembleSpec{pri, inputs}, ch); };
  auto grad = [&](const std::vector<double>& pri) {
    constexpr double h = 1e-6;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto up = pri, down = pri;
      up[i] += h;
      down[i] = std::max(0.0, down[i] - h);
      const double span = up[i] - down[i];
      auto norm = [](std::vector<double> v) {
        const double s = std::accumulate(v.begin(), v.end(), 0.0);
        for (auto& x : v) x /= s;
        return v;
      };
      g[i] = (f(norm(up)) - f(norm(down))) / span;
    }
    return g;
  };
  return maximize_on_simplex(n, f, grad, tol);
}

/// Coherent information floored at 0.
inline double quantum_capacity(const EnsembleSpec& input, const QuantumChannel& ch,
                               PriorMode mode = PriorMode::uniform) {
  if (mode == PriorMode::uniform) return std::max(0.0, coherent_information(input, ch));
  return std::max(0.0, optimize_coherent_information(input.states, ch).value);
}

// ---- superdense-coding codebooks ------------------------------------------
//
// For a codebook {E_i} applied to a shared state sigma and followed by a
// channel R, the process maps the reference-labelled input |Psi_i><Psi_j| to
// R(E_i sigma E_j^dagger). With R acting away from where sigma's noise
// commutes, this is exactly the entropy exchange of the noise channel on the
// uniform codeword ensemble.

struct Codebook {
  std::vector<double> priors;
  std::vector<Matrix> encoders;  // full-register operators
  DensityOperator shared;
  std::optional<QuantumChannel> after;  // full-register channel applied after encoding
};

inline std::vector<DensityOperator> codebook_outputs(const Codebook& cb) {
  std::vector<DensityOperator> out;
  out.reserve(cb.encoders.size());
  for (const auto& e : cb.encoders) {
    Matrix s = e * cb.shared.matrix() * e.adjoint();
    if (cb.after) s = detail::apply_kraus(*cb.after, s);
    out.emplace_back(std::move(s), DensityOperator::Unchecked{});
  }
  return out;
}

/// Entropy of the joint system-reference state, computed from its Gram matrix
/// (same nonzero spectrum, much smaller for low-rank shared states).
inline double codebook_entropy_exchange(const Codebook& cb) {
  const std::size_t count = cb.encoders.size();
  if (count == 0 || cb.priors.size() != count) throw std::invalid_argument("codebook priors/encoders mismatch");
  const Eigen::Index d = cb.shared.dim();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cb.shared.matrix());
  std::vector<Matrix> kraus = cb.after ? cb.after->kraus_ops() : std::vector<Matrix>{Matrix::Identity(d, d)};

  // Columns w_{a,k} = sum_i sqrt(pi_i s_k) K_a E_i v_k (x) |i>.
  std::vector<Vector> cols;
  for (const auto& ka : kraus) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double sk = solver.eigenvalues()(k);
      if (sk <= kEigenFloor) continue;
      const Vector vk = solver.eigenvectors().col(k);
      Vector w = Vector::Zero(d * static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i) {
        if (cb.priors[i] <= 0.0) continue;
        const Vector img = std::sqrt(cb.priors[i] * sk) * (ka * (cb.encoders[i] * vk));
        for (Eigen::Index r = 0; r < d; ++r) w(r * static_cast<Eigen::Index>(count) + static_cast<Eigen::Index>(i)) = img(r);
      }
      cols.push_back(std::move(w));
    }
  }
  Matrix w(d * static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) w.col(static_cast<Eigen::Index>(c)) = cols[c];
  return entropy_bits(w.adjoint() * w);
}

inline CapacityReport codebook_report(const Codebook& cb, PriorMode mode = PriorMode::uniform) {
  const auto outputs = codebook_outputs(cb);
  CapacityReport rep;
  const EnsembleSpec ens{cb.priors, outputs};
  rep.holevo = holevo(ens);
  rep.classical_capacity = mode == PriorMode::uniform ? rep.holevo : std::max(rep.holevo, optimize_holevo(outputs).value);
  rep.entropy_exchange = codebook_entropy_exchange(cb);
  rep.coherent_information = entropy_bits(ens.average()) - rep.entropy_exchange;
  rep.quantum_capacity = std::max(0.0, rep.coherent_information);
  return rep;
}

}  // namespace ghzsdc::capacity
