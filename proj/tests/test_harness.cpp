#include "ghzsdc/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

namespace ghzsdc::harness {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("ghzsdc_" + name); }

SweepConfig single_point(noise::NoiseKind kind, double p, std::vector<Pipeline> pipelines) {
  SweepConfig cfg;
  cfg.noise = kind;
  cfg.p_start = cfg.p_stop = p;
  cfg.pipelines = std::move(pipelines);
  return cfg;
}

TEST(Config, Validation) {
  SweepConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.p_start = 0.6;
  cfg.p_stop = 0.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.p_step = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.n = 2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.pipelines.clear();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Config, GridIncludesEndpoints) {
  SweepConfig cfg;
  cfg.p_start = 0.0;
  cfg.p_stop = 1.0;
  cfg.p_step = 0.05;
  const auto g = cfg.grid();
  ASSERT_EQ(g.size(), 21U);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_NEAR(g[5], 0.25, 1e-15);
}

TEST(Names, Pipelines) {
  for (auto p : {Pipeline::raw, Pipeline::purify, Pipeline::qnn, Pipeline::purify_qnn}) {
    EXPECT_EQ(parse_pipeline(to_string(p)), p);
  }
  EXPECT_FALSE(parse_pipeline("purify+qnn"));
}

TEST(Sweep, NoiselessPointIsIdeal) {
  const auto recs = run_sweep(single_point(noise::NoiseKind::depolarizing, 0.0, {Pipeline::raw}));
  ASSERT_EQ(recs.size(), 1U);
  EXPECT_NEAR(recs[0].holevo, 3.0, 1e-9);
  EXPECT_NEAR(recs[0].avg_fidelity, 1.0, 1e-9);
  EXPECT_NEAR(recs[0].quantum_capacity, 3.0, 1e-9);
  EXPECT_EQ(recs[0].pipeline, "raw");
  EXPECT_EQ(recs[0].noise, "depolarizing");
}

// Noise on every transmitted qubit. With noise on Bob's qubit alone Alice's
// n-1 qubits stay clean and the capacity cannot fall this far.
TEST(Sweep, AmplitudeDampingHalvesCapacityByQuarterStrength) {
  SweepConfig cfg;
  cfg.noise = noise::NoiseKind::amplitude_damping;
  cfg.stage = noise::NoiseStage::distribution_and_return;
  const auto recs = run_sweep(cfg);
  ASSERT_EQ(recs.size(), 21U);
  EXPECT_NEAR(recs[5].p, 0.25, 1e-15);
  EXPECT_LT(recs[5].holevo, 1.5);
  EXPECT_NEAR(recs[0].holevo, 3.0, 1e-9);
  for (std::size_t k = 1; k < recs.size(); ++k) EXPECT_LE(recs[k].holevo, recs[k - 1].holevo + 1e-9);

  cfg.stage = noise::NoiseStage::distribution_only;
  const auto dist = run_sweep(cfg);
  EXPECT_GT(dist[5].holevo, 2.0);
  EXPECT_NEAR(dist.back().holevo, 1.0, 1e-9);
}

TEST(Sweep, PurificationBeatsRawUnderBitFlip) {
  const auto recs = run_sweep(single_point(noise::NoiseKind::bit_flip, 0.2, {Pipeline::raw, Pipeline::purify}));
  ASSERT_EQ(recs.size(), 2U);
  // Sorted by pipeline name: purify < raw.
  EXPECT_EQ(recs[0].pipeline, "purify");
  EXPECT_EQ(recs[1].pipeline, "raw");
  EXPECT_GE(recs[0].avg_fidelity, recs[1].avg_fidelity);
  EXPECT_NEAR(recs[1].avg_fidelity, std::sqrt(0.8), 1e-12);
  EXPECT_NEAR(recs[0].avg_fidelity, std::sqrt(0.64 / (0.64 + 0.04)), 1e-12);
}

TEST(Sweep, PhaseFlipPurifiesAfterConversion) {
  const auto recs = run_sweep(single_point(noise::NoiseKind::phase_flip, 0.2, {Pipeline::raw, Pipeline::purify}));
  EXPECT_GT(recs[0].avg_fidelity, recs[1].avg_fidelity);
}

TEST(Sweep, ReturnStageLowersCapacity) {
  auto cfg = single_point(noise::NoiseKind::depolarizing, 0.1, {Pipeline::raw});
  const double dist = run_sweep(cfg)[0].holevo;
  cfg.stage = noise::NoiseStage::distribution_and_return;
  EXPECT_LT(run_sweep(cfg)[0].holevo, dist);
}

TEST(Sweep, InlineQnnPipelineRuns) {
  auto cfg = single_point(noise::NoiseKind::amplitude_damping, 0.3, {Pipeline::raw, Pipeline::qnn});
  cfg.qnn.training_size = 20;
  cfg.qnn.training.max_iters = 150;
  const auto recs = run_sweep(cfg);
  ASSERT_EQ(recs.size(), 2U);
  EXPECT_EQ(recs[0].pipeline, "qnn");
  EXPECT_GT(recs[0].avg_fidelity, recs[1].avg_fidelity);
}

TEST(Sweep, ModelWidthMismatchIsAnError) {
  const auto path = temp_path("model_w2.txt");
  {
    std::ofstream out(path);
    qnn::save_model(qnn::QnnModel::initialized({2, 1}, qnn::Initialization::passthrough), out);
  }
  auto cfg = single_point(noise::NoiseKind::bit_flip, 0.1, {Pipeline::qnn});
  cfg.qnn.model_path = path.string();
  EXPECT_THROW(run_sweep(cfg), std::invalid_argument);
  cfg.qnn.model_path = temp_path("does_not_exist.txt").string();
  EXPECT_THROW(run_sweep(cfg), std::runtime_error);
  fs::remove(path);
}

TEST(Sweep, LoadedPassthroughModelMatchesRaw) {
  const auto path = temp_path("model_w3.txt");
  {
    std::ofstream out(path);
    qnn::save_model(qnn::QnnModel::initialized({3, 1}, qnn::Initialization::passthrough), out);
  }
  auto cfg = single_point(noise::NoiseKind::depolarizing, 0.2, {Pipeline::raw, Pipeline::qnn});
  cfg.qnn.model_path = path.string();
  const auto recs = run_sweep(cfg);
  EXPECT_NEAR(recs[0].avg_fidelity, recs[1].avg_fidelity, 1e-12);
  EXPECT_NEAR(recs[0].holevo, recs[1].holevo, 1e-10);
  fs::remove(path);
}

TEST(Emit, EmptyListWritesHeaderOnly) {
  const auto path = temp_path("empty.csv");
  emit_records({}, path.string());
  EXPECT_EQ(slurp(path), std::string(kRecordHeader) + "\n");
  fs::remove(path);
}

TEST(Emit, OneRecordMatchesGolden) {
  auto cfg = single_point(noise::NoiseKind::amplitude_damping, 0.25, {Pipeline::raw});
  cfg.seed = 7;
  const auto path = temp_path("golden.csv");
  emit_records(run_sweep(cfg), path.string());
  EXPECT_EQ(slurp(path), slurp(fs::path(GHZSDC_TEST_DATA) / "golden_one_record.csv"));
  fs::remove(path);
}

TEST(Emit, SeededSweepsAreByteIdentical) {
  auto cfg = single_point(noise::NoiseKind::bit_flip, 0.15, {Pipeline::raw, Pipeline::purify, Pipeline::qnn});
  cfg.p_stop = 0.25;
  cfg.p_step = 0.05;
  cfg.seed = 99;
  cfg.workers = 2;
  cfg.qnn.training_size = 10;
  cfg.qnn.training.max_iters = 10;
  const auto a = temp_path("det_a.csv"), b = temp_path("det_b.csv");
  emit_records(run_sweep(cfg), a.string());
  cfg.workers = 1;
  emit_records(run_sweep(cfg), b.string());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  fs::remove(a);
  fs::remove(b);
}

TEST(Emit, UnwritablePathNamesThePath) {
  try {
    emit_records({}, "/nonexistent-dir/out.csv");
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/out.csv"), std::string::npos);
  }
}

TEST(Emit, RejectsInvalidRecord) {
  SweepRecord r;
  r.avg_fidelity = 1.5;
  EXPECT_THROW(format_records({r}), std::logic_error);
}

TEST(Emit, RealFormatting) {
  EXPECT_EQ(format_real(0.25), "0.25");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_real(-0.0), "0");
}

}  // namespace
}  // namespace ghzsdc::harness
