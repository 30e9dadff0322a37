// Parameter sweeps over noise strength for the four processing pipelines, and
// the CSV record format they emit.
#pragma once

#include "ghzsdc/capacity.hpp"
#include "ghzsdc/noise.hpp"
#include "ghzsdc/protocol.hpp"
#include "ghzsdc/qnn.hpp"
#include "ghzsdc/sdc.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace ghzsdc::harness {

enum class Pipeline { raw, purify, qnn, purify_qnn };

inline std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::raw: return "raw";
    case Pipeline::purify: return "purify";
    case Pipeline::qnn: return "qnn";
    case Pipeline::purify_qnn: return "purify-qnn";
  }
  return "unknown";
}

inline std::optional<Pipeline> parse_pipeline(std::string_view s) {
  for (auto p : {Pipeline::raw, Pipeline::purify, Pipeline::qnn, Pipeline::purify_qnn}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline bool uses_purification(Pipeline p) { return p == Pipeline::purify || p == Pipeline::purify_qnn; }
inline bool uses_qnn(Pipeline p) { return p == Pipeline::qnn || p == Pipeline::purify_qnn; }

struct QnnSettings {
  std::optional<std::string> model_path;
  double train_at = 0.3;  // p used for the single inline-trained model
  bool retrain_per_p = false;
  std::size_t training_size = 100;
  int hidden_layers = 1;
  qnn::TrainingOptions training;
};

struct SweepConfig {
  noise::NoiseKind noise = noise::NoiseKind::amplitude_damping;
  double p_start = 0.0;
  double p_stop = 1.0;
  double p_step = 0.05;
  int n = 3;
  std::vector<Pipeline> pipelines = {Pipeline::raw};
  int rounds = 1;
  QnnSettings qnn;
  noise::NoiseStage stage = noise::NoiseStage::distribution_only;
  std::uint64_t seed = 0;
  std::optional<std::string> out_path;
  unsigned workers = 1;
  capacity::PriorMode priors = capacity::PriorMode::uniform;

  void validate() const {
    if (!(p_start >= 0.0 && p_start <= p_stop && p_stop <= 1.0)) {
      throw std::invalid_argument("p range must satisfy 0 <= start <= stop <= 1");
    }
    if (!(p_step > 0.0)) throw std::invalid_argument("p step must be positive");
    if (n < 3 || n > 5) throw std::invalid_argument("sweeps support n in [3, 5]");
    if (pipelines.empty()) throw std::invalid_argument("no pipeline selected");
    for (auto p : pipelines) {
      if (uses_purification(p) && rounds < 1) throw std::invalid_argument("purification pipelines need rounds >= 1");
    }
  }

  std::vector<double> grid() const {
    std::vector<double> ps;
    for (std::size_t k = 0;; ++k) {
      const double p = p_start + static_cast<double>(k) * p_step;
      if (p > p_stop + 1e-12) break;
      ps.push_back(std::min(p, p_stop));
    }
    return ps;
  }
};

struct SweepRecord {
  std::string noise;
  double p = 0.0;
  int n = 0;
  std::string pipeline;
  double avg_fidelity = 0.0;
  double holevo = 0.0;
  double classical_capacity = 0.0;
  double coherent_info = 0.0;
  double quantum_capacity = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(avg_fidelity >= 0.0 && avg_fidelity <= 1.0)) throw std::logic_error("record fidelity outside [0, 1]");
    for (double v : {holevo, classical_capacity, coherent_info, quantum_capacity}) {
      if (!std::isfinite(v)) throw std::logic_error("record capacity is not finite");
    }
  }
};

inline constexpr std::string_view kRecordHeader =
    "noise,p,n,pipeline,avg_fidelity,holevo,classical_capacity,coherent_info,quantum_capacity,seed";

/// Trains the corrector for one noise point. Inputs are the shared state as it
/// reaches the QNN: distribution trajectories, or samples of the purified state.
inline qnn::TrainingResult train_corrector(int n, noise::NoiseKind kind, double p, Pipeline pipeline, int rounds,
                                           noise::NoiseStage stage, const QnnSettings& settings, std::uint64_t seed) {
  const noise::NoiseSpec spec{kind, p, stage};
  qnn::TrainingSet set;
  if (uses_purification(pipeline)) {
    const auto shared = sdc::prepare_shared_state(n, spec, sdc::Corrector{rounds, nullptr});
    set = qnn::mixture_training_set(shared.state, sdc::ghz_state(n), settings.training_size, seed);
  } else {
    const int bob = 0;
    set = qnn::distribution_training_set(n, noise::make_channel(kind, p), {&bob, 1}, settings.training_size, seed);
  }
  qnn::TrainingOptions opt = settings.training;
  opt.seed = mix_seed(seed, 0x9e11);
  return qnn::train({n, settings.hidden_layers}, set, opt);
}

inline std::shared_ptr<const qnn::QnnModel> load_model_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file '" + path + "'");
  auto model = std::make_shared<const qnn::QnnModel>(qnn::load_model(in));
  if (model->architecture().width != n) {
    throw std::invalid_argument("model '" + path + "' has width " + std::to_string(model->architecture().width) +
                                " but the sweep uses n = " + std::to_string(n));
  }
  return model;
}

/// One record for noise strength p and a fixed corrector.
inline SweepRecord evaluate_point(const SweepConfig& cfg, Pipeline pipeline, double p,
                                  std::shared_ptr<const qnn::QnnModel> model) {
  const noise::NoiseSpec spec{cfg.noise, p, cfg.stage};
  sdc::Corrector corrector{uses_purification(pipeline) ? cfg.rounds : 0, uses_qnn(pipeline) ? model : nullptr};
  if (uses_qnn(pipeline) && !corrector.model) throw std::logic_error("qnn pipeline without a model");

  const int n = cfg.n;
  const sdc::SharedState shared = sdc::prepare_shared_state(n, spec, corrector);
  const std::size_t count = std::size_t{1} << n;

  capacity::Codebook cb{std::vector<double>(count, 1.0 / static_cast<double>(count)), {}, shared.state, std::nullopt};
  double fid = 0.0;
  for (std::size_t x = 0; x < count; ++x) {
    const sdc::Codeword code(n, x);
    fid += sdc::run_on_shared(shared, code, spec).post_fidelity;
    cb.encoders.push_back(kron(gates::identity(), sdc::encode_usdc(code).matrix()));
  }
  if (cfg.stage == noise::NoiseStage::distribution_and_return) {
    const QuantumChannel single = noise::make_channel(cfg.noise, p);
    QuantumChannel ret = QuantumChannel::identity(n);
    for (int q = 1; q < n; ++q) ret = capacity::compose(capacity::embed_channel(single, n, {q}), ret);
    cb.after = std::move(ret);
  }
  const capacity::CapacityReport rep = capacity::codebook_report(cb, cfg.priors);

  SweepRecord rec;
  rec.noise = std::string(noise::to_string(cfg.noise));
  rec.p = p;
  rec.n = n;
  rec.pipeline = std::string(to_string(pipeline));
  rec.avg_fidelity = std::clamp(fid / static_cast<double>(count), 0.0, 1.0);
  rec.holevo = rep.holevo;
  rec.classical_capacity = rep.classical_capacity;
  rec.coherent_info = rep.coherent_information;
  rec.quantum_capacity = rep.quantum_capacity;
  rec.seed = cfg.seed;
  rec.validate();
  return rec;
}

inline void sort_records(std::vector<SweepRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.pipeline != b.pipeline) return a.pipeline < b.pipeline;
    return a.p < b.p;
  });
}

inline std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto grid = cfg.grid();

  struct Job {
    Pipeline pipeline;
    double p;
    std::shared_ptr<const qnn::QnnModel> model;
  };
  std::vector<Job> jobs;
  for (std::size_t pi = 0; pi < cfg.pipelines.size(); ++pi) {
    const Pipeline pipeline = cfg.pipelines[pi];
    std::shared_ptr<const qnn::QnnModel> shared_model;
    if (uses_qnn(pipeline)) {
      if (cfg.qnn.model_path) {
        shared_model = load_model_file(*cfg.qnn.model_path, cfg.n);
      } else if (!cfg.qnn.retrain_per_p) {
        auto trained = train_corrector(cfg.n, cfg.noise, cfg.qnn.train_at, pipeline, cfg.rounds, cfg.stage, cfg.qnn,
                                       mix_seed(cfg.seed, pi));
        shared_model = std::make_shared<const qnn::QnnModel>(std::move(trained.model));
      }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) jobs.push_back({pipeline, grid[k], shared_model});
  }

  std::vector<std::optional<SweepRecord>> slots(jobs.size());
  qnn::detail::parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    Job job = jobs[i];
    if (uses_qnn(job.pipeline) && !job.model) {
      auto trained = train_corrector(cfg.n, cfg.noise, job.p, job.pipeline, cfg.rounds, cfg.stage, cfg.qnn,
                                     mix_seed(cfg.seed, 1000 + i));
      job.model = std::make_shared<const qnn::QnnModel>(std::move(trained.model));
    }
    slots[i] = evaluate_point(cfg, job.pipeline, job.p, job.model);
  });

  std::vector<SweepRecord> records;
  records.reserve(slots.size());
  for (auto& s : slots) records.push_back(std::move(*s));
  sort_records(records);
  return records;
}

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

/// Header plus one row per record, sorted by (pipeline, p).
inline std::string format_records(std::vector<SweepRecord> records) {
  sort_records(records);
  std::ostringstream out;
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    r.validate();
    out << r.noise << ',' << format_real(r.p) << ',' << r.n << ',' << r.pipeline << ',' << format_real(r.avg_fidelity)
        << ',' << format_real(r.holevo) << ',' << format_real(r.classical_capacity) << ','
        << format_real(r.coherent_info) << ',' << format_real(r.quantum_capacity) << ',' << r.seed << '\n';
  }
  return out.str();
}

inline void emit_records(const std::vector<SweepRecord>& records, const std::string& path) {
  const std::string text = format_records(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing records to '" + path + "'");
}

}  // namespace ghzsdc::harness
