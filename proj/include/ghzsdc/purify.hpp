// Bilateral-CNOT entanglement purification for pairs of n-GHZ copies.
#pragma once

#include "ghzsdc/qcore.hpp"
#include "ghzsdc/sdc.hpp"

#include <functional>
#include <optional>
#include <stdexcept>

namespace ghzsdc::purify {

/// Decides from the target-register outcome (n bits) whether the control copy is kept.
using AcceptRule = std::function<bool(std::size_t outcome, int n)>;

/// Keep when every target qubit reads the same value.
inline bool all_equal(std::size_t outcome, int n) {
  return outcome == 0 || outcome == (std::size_t{1} << n) - 1;
}

struct PurificationResult {
  std::optional<DensityOperator> kept_state;
  double success_probability = 0.0;
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
  int rounds = 0;
};

class PurificationUnderflow : public std::runtime_error {
 public:
  PurificationUnderflow(int round, double probability)
      : std::runtime_error("purification success probability " + std::to_string(probability) +
                           " underflowed at round " + std::to_string(round)),
        round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

inline constexpr double kMinSuccessProbability = 1e-12;

/// `pair_state` holds the control copy on qubits 0..n-1 and the target copy on n..2n-1.
/// CNOTs run from A_i to B_i, then B is measured and the rule decides acceptance.
inline PurificationResult purify_round(const DensityOperator& pair_state, int n, const AcceptRule& accept = all_equal) {
  if (pair_state.qubit_count() % 2 != 0) throw std::invalid_argument("purify_round: odd qubit count");
  if (pair_state.qubit_count() != 2 * n) {
    throw std::invalid_argument("purify_round: expected " + std::to_string(2 * n) + " qubits, got " +
                                std::to_string(pair_state.qubit_count()));
  }
  const StateVector ideal = sdc::ghz_state(n);

  std::vector<int> control(static_cast<std::size_t>(n)), target(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    control[static_cast<std::size_t>(i)] = i;
    target[static_cast<std::size_t>(i)] = n + i;
  }

  PurificationResult result;
  result.rounds = 1;
  result.fidelity_before = fidelity(ideal, partial_trace(pair_state, control));

  const Unitary cx(gates::cnot());
  DensityOperator state = pair_state;
  for (int i = 0; i < n; ++i) state = apply_unitary(state, cx, {i, n + i});

  Matrix kept = Matrix::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  double accepted = 0.0;
  for (const auto& outcome : measure_computational(state, target)) {
    if (!accept(outcome.outcome_index, n) || !outcome.post_state) continue;
    accepted += outcome.probability;
    kept += outcome.probability * outcome.post_state->matrix();
  }
  result.success_probability = std::clamp(accepted, 0.0, 1.0);
  if (accepted >= kMinSuccessProbability) {
    result.kept_state.emplace(kept / accepted, DensityOperator::Unchecked{});
    result.fidelity_after = fidelity(ideal, *result.kept_state);
  }
  return result;
}

/// Recurrence: each round purifies two i.i.d. copies of the previous round's output.
/// Success probability is the product of per-round acceptances.
inline PurificationResult purify_iterated(const DensityOperator& source, int n, int rounds,
                                          const AcceptRule& accept = all_equal) {
  if (rounds < 1) throw std::invalid_argument("purify_iterated: rounds must be >= 1");
  if (source.qubit_count() != n) throw std::invalid_argument("purify_iterated: source width does not match n");

  PurificationResult total;
  total.fidelity_before = fidelity(sdc::ghz_state(n), source);
  total.success_probability = 1.0;
  DensityOperator current = source;
  for (int r = 1; r <= rounds; ++r) {
    PurificationResult step = purify_round(tensor_product(current, current), n, accept);
    total.success_probability *= step.success_probability;
    if (!step.kept_state || total.success_probability < kMinSuccessProbability) {
      throw PurificationUnderflow(r, total.success_probability);
    }
    current = *step.kept_state;
    total.fidelity_after = step.fidelity_after;
    total.rounds = r;
  }
  total.kept_state = current;
  return total;
}

}  // namespace ghzsdc::purify
