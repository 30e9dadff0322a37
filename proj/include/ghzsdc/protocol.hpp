// End-to-end superdense-coding runs: distribution noise, optional correction
// (purification then QNN), encoding, optional return noise and decoding.
#pragma once

#include "ghzsdc/noise.hpp"
#include "ghzsdc/purify.hpp"
#include "ghzsdc/qcore.hpp"
#include "ghzsdc/qnn.hpp"
#include "ghzsdc/sdc.hpp"

#include <memory>
#include <numeric>

namespace ghzsdc::sdc {

struct Corrector {
  int purify_rounds = 0;
  std::shared_ptr<const qnn::QnnModel> model;

  bool empty() const { return purify_rounds == 0 && !model; }
};

struct SharedState {
  DensityOperator state;
  int n = 0;
  double fidelity_distributed = 0.0;  // before any correction
  std::optional<purify::PurificationResult> purification;
};

struct SdcRunResult {
  Codeword codeword;
  DensityOperator received_state;
  std::vector<double> decode_distribution;
  double post_fidelity = 0.0;
};

/// Channel hitting the distributed qubit. Phase-flip noise is Hadamard-sandwiched
/// into bit-flip noise when purification follows, since the recurrence only
/// detects bit errors.
inline QuantumChannel distribution_channel(const noise::NoiseSpec& spec, const Corrector& corrector) {
  QuantumChannel ch = noise::make_channel(spec.kind, spec.p);
  if (corrector.purify_rounds > 0 && spec.kind == noise::NoiseKind::phase_flip) ch = noise::conjugate_by_hadamard(ch);
  return ch;
}

inline std::vector<int> alice_qubits(int n) {
  std::vector<int> q(static_cast<std::size_t>(n - 1));
  std::iota(q.begin(), q.end(), 1);
  return q;
}

/// The state Alice and Bob hold after distribution and correction, before encoding.
inline SharedState prepare_shared_state(int n, const noise::NoiseSpec& spec, const Corrector& corrector = {}) {
  const StateVector ideal = ghz_state(n);
  DensityOperator rho = apply_channel(DensityOperator::pure(ideal), distribution_channel(spec, corrector), {0});
  SharedState out{rho, n, fidelity(ideal, rho), std::nullopt};
  if (corrector.purify_rounds > 0) {
    out.purification = purify::purify_iterated(out.state, n, corrector.purify_rounds);
    out.state = *out.purification->kept_state;
  }
  if (corrector.model) {
    if (corrector.model->architecture().width != n) {
      throw std::invalid_argument("QNN model width " + std::to_string(corrector.model->architecture().width) +
                                  " does not match n = " + std::to_string(n));
    }
    out.state = qnn::correct_state(*corrector.model, out.state);
  }
  return out;
}

/// Encodes `code` into a prepared shared state and decodes it.
inline SdcRunResult run_on_shared(const SharedState& shared, const Codeword& code, const noise::NoiseSpec& spec) {
  const int n = shared.n;
  if (code.n() != n) throw std::invalid_argument("codeword width does not match the shared state");
  const auto alice = alice_qubits(n);
  DensityOperator rho = apply_unitary(shared.state, encode_usdc(code), alice);
  if (spec.stage == noise::NoiseStage::distribution_and_return) {
    const QuantumChannel ch = noise::make_channel(spec.kind, spec.p);
    for (int q : alice) rho = apply_channel(rho, ch, {q});
  }
  SdcRunResult result{code, rho, decode_ghz(rho, n), 0.0};
  result.post_fidelity = fidelity(encoded_target(code), rho);
  return result;
}

inline SdcRunResult run_protocol(int n, const Codeword& code, const noise::NoiseSpec& spec,
                                 const Corrector& corrector = {}) {
  if (code.n() != n) throw std::invalid_argument("codeword width does not match n");
  return run_on_shared(prepare_shared_state(n, spec, corrector), code, spec);
}

}  // namespace ghzsdc::sdc
