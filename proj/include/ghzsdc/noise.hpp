// Single-qubit noise channels and Kraus-branch trajectory sampling.
#pragma once

#include "ghzsdc/qcore.hpp"
#include "ghzsdc/random.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ghzsdc::noise {

enum class NoiseKind { amplitude_damping, depolarizing, bit_flip, phase_flip };

enum class NoiseStage { distribution_only, distribution_and_return };

inline constexpr std::array<NoiseKind, 4> kAllKinds = {NoiseKind::amplitude_damping, NoiseKind::depolarizing,
                                                       NoiseKind::bit_flip, NoiseKind::phase_flip};

inline std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::amplitude_damping: return "amplitude-damping";
    case NoiseKind::depolarizing: return "depolarizing";
    case NoiseKind::bit_flip: return "bit-flip";
    case NoiseKind::phase_flip: return "phase-flip";
  }
  return "unknown";
}

inline std::optional<NoiseKind> parse_kind(std::string_view name) {
  for (auto k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

inline std::string_view to_string(NoiseStage stage) {
  return stage == NoiseStage::distribution_only ? "dist" : "both";
}

inline std::optional<NoiseStage> parse_stage(std::string_view name) {
  if (name == "dist") return NoiseStage::distribution_only;
  if (name == "both") return NoiseStage::distribution_and_return;
  return std::nullopt;
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::amplitude_damping;
  double p = 0.0;
  NoiseStage stage = NoiseStage::distribution_only;
};

inline void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probability must lie in [0, 1]");
}

// Depolarizing splits the error weight p equally across X, Y and Z, so p = 3/4
// is the fully depolarizing point.
inline QuantumChannel make_channel(NoiseKind kind, double p) {
  check_probability(p);
  const Matrix id = gates::identity();
  switch (kind) {
    case NoiseKind::bit_flip:
      return QuantumChannel({std::sqrt(1.0 - p) * id, std::sqrt(p) * gates::pauli_x()});
    case NoiseKind::phase_flip:
      return QuantumChannel({std::sqrt(1.0 - p) * id, std::sqrt(p) * gates::pauli_z()});
    case NoiseKind::depolarizing: {
      const double w = std::sqrt(p / 3.0);
      return QuantumChannel(
          {std::sqrt(1.0 - p) * id, w * gates::pauli_x(), w * gates::pauli_y(), w * gates::pauli_z()});
    }
    case NoiseKind::amplitude_damping: {
      Matrix k0 = Matrix::Zero(2, 2);
      k0(0, 0) = 1.0;
      k0(1, 1) = std::sqrt(1.0 - p);
      Matrix k1 = Matrix::Zero(2, 2);
      k1(0, 1) = std::sqrt(p);
      return QuantumChannel({k0, k1});
    }
  }
  throw std::invalid_argument("unknown noise kind");
}

/// Replaces every Kraus operator K by H K H.
inline QuantumChannel conjugate_by_hadamard(const QuantumChannel& ch) {
  if (ch.qubit_count() != 1) throw std::invalid_argument("conjugate_by_hadamard expects a single-qubit channel");
  const Matrix h = gates::hadamard();
  std::vector<Matrix> out;
  out.reserve(ch.kraus_ops().size());
  for (const auto& k : ch.kraus_ops()) out.push_back(h * k * h);
  return QuantumChannel(std::move(out));
}

/// Picks Kraus branch i with probability ||K_i psi||^2 and returns the renormalized branch.
inline StateVector sample_trajectory(const StateVector& psi, const QuantumChannel& ch, std::span<const int> targets,
                                     std::uint64_t rng_seed) {
  detail::check_targets(targets, ch.qubit_count(), psi.qubit_count());
  Rng rng(rng_seed);
  const double u = rng.uniform();

  std::optional<Vector> last_nonzero;
  double cumulative = 0.0;
  for (const auto& k : ch.kraus_ops()) {
    Vector branch = psi.amplitudes();
    detail::apply_local(branch.data(), psi.qubit_count(), k, targets);
    const double w = branch.squaredNorm();
    if (w <= 0.0) continue;
    cumulative += w;
    last_nonzero = branch;
    if (u < cumulative) return StateVector::normalized(std::move(branch));
  }
  // Rounding left u beyond the summed weights; the last populated branch owns the remainder.
  return StateVector::normalized(std::move(*last_nonzero));
}

inline StateVector sample_trajectory(const StateVector& psi, const QuantumChannel& ch,
                                     std::initializer_list<int> targets, std::uint64_t rng_seed) {
  return sample_trajectory(psi, ch, std::span<const int>(targets.begin(), targets.size()), rng_seed);
}

/// Draws one eigenvector of rho with probability equal to its eigenvalue.
inline StateVector sample_eigenstate(const DensityOperator& rho, std::uint64_t rng_seed) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
  const Eigen::VectorXd& ev = solver.eigenvalues();
  Rng rng(rng_seed);
  const double u = rng.uniform() * std::max(ev.cwiseMax(0.0).sum(), 1e-300);
  double cumulative = 0.0;
  Eigen::Index chosen = ev.size() - 1;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    cumulative += std::max(ev(i), 0.0);
    if (u < cumulative) {
      chosen = i;
      break;
    }
  }
  return StateVector::normalized(solver.eigenvectors().col(chosen));
}

}  // namespace ghzsdc::noise
