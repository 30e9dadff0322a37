#include "ghzsdc/noise.hpp"
#include "ghzsdc/protocol.hpp"
#include "ghzsdc/sdc.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <map>

namespace ghzsdc::sdc {
namespace {

using testing::max_abs_diff;

Vector ket(int n, std::initializer_list<std::pair<const char*, double>> terms) {
  Vector v = Vector::Zero(Eigen::Index{1} << n);
  for (const auto& [label, amp] : terms) v(static_cast<Eigen::Index>(std::stoul(label, nullptr, 2))) += amp;
  return v;
}

const double kS = 1.0 / std::sqrt(2.0);

TEST(GhzBasis, ThreeQubitMembers) {
  const auto basis = ghz_basis(3);
  EXPECT_LT((basis.state(0).amplitudes() - ket(3, {{"000", kS}, {"111", kS}})).norm(), 1e-15);
  EXPECT_LT((basis.state(7).amplitudes() - ket(3, {{"011", kS}, {"100", -kS}})).norm(), 1e-15);
  EXPECT_LT((basis.state(4).amplitudes() - ket(3, {{"010", kS}, {"101", kS}})).norm(), 1e-15);
}

TEST(GhzBasis, TwoQubitIsBellBasis) {
  const auto basis = ghz_basis(2);
  EXPECT_LT((basis.state(0).amplitudes() - ket(2, {{"00", kS}, {"11", kS}})).norm(), 1e-15);
  EXPECT_LT((basis.state(1).amplitudes() - ket(2, {{"00", kS}, {"11", -kS}})).norm(), 1e-15);
  EXPECT_LT((basis.state(2).amplitudes() - ket(2, {{"01", kS}, {"10", kS}})).norm(), 1e-15);
  EXPECT_LT((basis.state(3).amplitudes() - ket(2, {{"01", kS}, {"10", -kS}})).norm(), 1e-15);
}

TEST(GhzBasis, OrthonormalWithTwoEqualAmplitudes) {
  for (int n = 2; n <= 7; ++n) {
    const auto basis = ghz_basis(n);
    Matrix gram(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      int nonzero = 0;
      for (Eigen::Index k = 0; k < basis.state(i).dim(); ++k) {
        const double a = std::abs(basis.state(i)[k]);
        if (a > 0) {
          ++nonzero;
          EXPECT_NEAR(a, kS, 1e-15);
        }
      }
      EXPECT_EQ(nonzero, 2);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            basis.state(i).amplitudes().dot(basis.state(j).amplitudes());
      }
    }
    EXPECT_LT(max_abs_diff(gram, Matrix::Identity(gram.rows(), gram.cols())), 1e-10) << "n=" << n;
  }
}

TEST(GhzBasis, RangeChecked) {
  EXPECT_THROW(ghz_basis(1), std::invalid_argument);
  EXPECT_THROW(ghz_basis(13), std::invalid_argument);
}

TEST(Codeword, ShiftIdentity) {
  for (int n = 1; n <= 8; ++n) {
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const Codeword c(n, x);
      for (int k = 0; k + 1 < n; ++k) EXPECT_EQ(c.shifted_bit(k), c.bit(k + 1));
    }
  }
  EXPECT_EQ(Codeword(3, 6).to_string(), "110");
  EXPECT_THROW(Codeword(3, 8), std::invalid_argument);
}

Matrix three_qubit_operator(std::uint64_t x) {
  const Matrix i = gates::identity(), sx = gates::pauli_x(), sz = gates::pauli_z();
  const Matrix my = cplx(0, -1) * gates::pauli_y();
  switch (x) {
    case 0b000: return kron(i, i);
    case 0b001: return kron(sz, i);
    case 0b010: return kron(i, sx);
    case 0b011: return kron(sz, sx);
    case 0b100: return kron(sx, i);
    case 0b101: return kron(my, i);
    case 0b110: return kron(sx, sx);
    default: return kron(my, sx);
  }
}

TEST(Encoder, MatchesThreeQubitOperatorTable) {
  for (std::uint64_t x = 0; x < 8; ++x) {
    EXPECT_LT(max_abs_diff(encode_usdc(Codeword(3, x)).matrix(), three_qubit_operator(x)), 1e-15) << "X=" << x;
  }
}

TEST(Encoder, FourQubitBitwiseEvaluation) {
  // X = 1011: (x0, x3) = (1, 1) -> -i sigma_y; floor(X/2) = 101 -> factors use y1 = 0, y0 = 1.
  const Matrix expected = kron(kron(cplx(0, -1) * gates::pauli_y(), gates::identity()), gates::pauli_x());
  EXPECT_LT(max_abs_diff(encode_usdc(Codeword(4, 0b1011)).matrix(), expected), 1e-15);
  EXPECT_THROW(encode_usdc(Codeword(2, 1)), std::invalid_argument);
}

TEST(Encoder, SignedPermutationMatrices) {
  for (int n = 3; n <= 6; ++n) {
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const Matrix u = encode_usdc(Codeword(n, x)).matrix();
      for (Eigen::Index r = 0; r < u.rows(); ++r) {
        int row_hits = 0, col_hits = 0;
        for (Eigen::Index c = 0; c < u.cols(); ++c) {
          const double a = std::abs(u(r, c)), b = std::abs(u(c, r));
          if (a > 1e-12) {
            ++row_hits;
            EXPECT_NEAR(a, 1.0, 1e-15);
          }
          if (b > 1e-12) ++col_hits;
        }
        EXPECT_EQ(row_hits, 1);
        EXPECT_EQ(col_hits, 1);
      }
    }
  }
}

// Brute force: the images of |Psi_1> over all codewords hit each GHZ member exactly once.
TEST(Encoder, BijectiveOntoGhzBasis) {
  for (int n = 3; n <= 6; ++n) {
    const auto basis = ghz_basis(n);
    std::vector<int> hits(basis.size(), 0);
    std::vector<Vector> images;
    for (std::uint64_t x = 0; x < basis.size(); ++x) images.push_back(encoded_target(Codeword(n, x)).amplitudes());
    for (std::size_t a = 0; a < images.size(); ++a) {
      for (std::size_t b = 0; b < images.size(); ++b) {
        EXPECT_NEAR(std::abs(images[a].dot(images[b])), a == b ? 1.0 : 0.0, 1e-10);
      }
      int match = -1;
      for (std::size_t k = 0; k < basis.size(); ++k) {
        if (std::abs(std::abs(basis.state(k).amplitudes().dot(images[a])) - 1.0) < 1e-10) match = static_cast<int>(k);
      }
      ASSERT_GE(match, 0) << "n=" << n << " X=" << a;
      ++hits[static_cast<std::size_t>(match)];
    }
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Decode, Examples) {
  const auto basis = ghz_basis(3);
  const auto d0 = decode_ghz(DensityOperator::pure(basis.state(0)), 3);
  EXPECT_NEAR(d0[0], 1.0, 1e-15);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_NEAR(d0[i], 0.0, 1e-15);

  for (double v : decode_ghz(DensityOperator::maximally_mixed(3), 3)) EXPECT_NEAR(v, 0.125, 1e-15);

  // Bit flip on qubit 0: (|100> + |011>)/sqrt2 is the 7th member (index 6).
  const auto noisy = apply_channel(DensityOperator::pure(basis.state(0)),
                                   noise::make_channel(noise::NoiseKind::bit_flip, 0.1), {0});
  const auto d = decode_ghz(noisy, 3);
  EXPECT_NEAR(d[0], 0.9, 1e-12);
  EXPECT_NEAR(d[6], 0.1, 1e-12);
  EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-9);

  EXPECT_THROW(decode_ghz(DensityOperator::maximally_mixed(2), 3), std::invalid_argument);
}

TEST(Protocol, NoiselessRoundTrip) {
  const noise::NoiseSpec clean{noise::NoiseKind::depolarizing, 0.0, noise::NoiseStage::distribution_and_return};
  for (int n = 3; n <= 6; ++n) {
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const Codeword code(n, x);
      const auto r = run_protocol(n, code, clean);
      const int expected = ghz_index_of(encoded_target(code));
      ASSERT_GE(expected, 0);
      EXPECT_NEAR(r.decode_distribution[static_cast<std::size_t>(expected)], 1.0, 1e-12);
      EXPECT_NEAR(r.post_fidelity, 1.0, 1e-12);
    }
  }
}

TEST(Protocol, ThreeQubitReceivedStates) {
  // Last row taken as (|011> - |100>)/sqrt2.
  const std::map<std::uint64_t, Vector> table = {
      {0b000, ket(3, {{"000", kS}, {"111", kS}})},  {0b001, ket(3, {{"000", kS}, {"111", -kS}})},
      {0b010, ket(3, {{"001", kS}, {"110", kS}})},  {0b011, ket(3, {{"001", kS}, {"110", -kS}})},
      {0b100, ket(3, {{"010", kS}, {"101", kS}})},  {0b101, ket(3, {{"010", kS}, {"101", -kS}})},
      {0b110, ket(3, {{"011", kS}, {"100", kS}})},  {0b111, ket(3, {{"011", kS}, {"100", -kS}})},
  };
  const noise::NoiseSpec clean{};
  for (const auto& [x, v] : table) {
    const auto r = run_protocol(3, Codeword(3, x), clean);
    EXPECT_LT(max_abs_diff(r.received_state.matrix(), v * v.adjoint()), 1e-14) << "X=" << x;
  }
}

TEST(Protocol, FullDampingHalvesOverlap) {
  const noise::NoiseSpec spec{noise::NoiseKind::amplitude_damping, 1.0, noise::NoiseStage::distribution_only};
  const auto r = run_protocol(3, Codeword(3, 0), spec);
  // Bob's qubit resets: rho = 1/2(|000><000| + |011><011|), <Psi_1|rho|Psi_1> = 1/4.
  EXPECT_NEAR(r.post_fidelity, std::sqrt(0.25), 1e-12);
}

TEST(Protocol, ReturnStageAddsNoise) {
  const noise::NoiseSpec dist{noise::NoiseKind::bit_flip, 0.2, noise::NoiseStage::distribution_only};
  noise::NoiseSpec both = dist;
  both.stage = noise::NoiseStage::distribution_and_return;
  const Codeword code(3, 5);
  const double f1 = run_protocol(3, code, dist).post_fidelity;
  const double f2 = run_protocol(3, code, both).post_fidelity;
  EXPECT_NEAR(f1 * f1, 0.8, 1e-12);
  // Flipping all three qubits maps every GHZ member onto itself.
  EXPECT_NEAR(f2 * f2, 0.8 * 0.8 * 0.8 + 0.2 * 0.2 * 0.2, 1e-12);
}

TEST(Protocol, DecodeDistributionNormalized) {
  for (auto kind : noise::kAllKinds) {
    const noise::NoiseSpec spec{kind, 0.37, noise::NoiseStage::distribution_and_return};
    const auto r = run_protocol(4, Codeword(4, 9), spec);
    EXPECT_NEAR(std::accumulate(r.decode_distribution.begin(), r.decode_distribution.end(), 0.0), 1.0, 1e-9);
  }
}

}  // namespace
}  // namespace ghzsdc::sdc
