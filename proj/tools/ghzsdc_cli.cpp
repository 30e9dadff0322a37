// Command-line front end: noise sweeps, corrector training, purification demo
// and single-point capacity evaluation.

#include "ghzsdc/harness.hpp"
#include "ghzsdc/purify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace ghzsdc;

namespace {

struct Options {
  std::string noise = "amplitude-damping";
  double p_start = 0.0;
  double p_stop = 1.0;
  double p_step = 0.05;
  double p = 0.3;
  int n = 3;
  std::vector<std::string> pipelines = {"raw"};
  int rounds = 1;
  std::string model;
  std::string stage = "dist";
  std::uint64_t seed = 0;
  std::string out;
  double train_at = 0.3;
  bool retrain_per_p = false;
  std::size_t train_size = 100;
  int iters = 200;
  double step = 0.1;
  int hidden = 1;
  std::string init = "random";
  unsigned workers = 1;
  bool optimize_priors = false;
};

noise::NoiseKind kind_of(const std::string& s) {
  if (auto k = noise::parse_kind(s)) return *k;
  throw std::invalid_argument("unknown noise '" + s + "' (amplitude-damping, depolarizing, bit-flip, phase-flip)");
}

noise::NoiseStage stage_of(const std::string& s) {
  if (auto st = noise::parse_stage(s)) return *st;
  throw std::invalid_argument("unknown noise stage '" + s + "' (dist, both)");
}

qnn::Initialization init_of(const std::string& s) {
  if (s == "random") return qnn::Initialization::random;
  if (s == "identity") return qnn::Initialization::identity;
  if (s == "passthrough") return qnn::Initialization::passthrough;
  throw std::invalid_argument("unknown init '" + s + "' (random, identity, passthrough)");
}

std::vector<harness::Pipeline> pipelines_of(const std::vector<std::string>& names) {
  std::vector<harness::Pipeline> out;
  for (const auto& name : names) {
    if (name == "all") {
      for (auto p : {harness::Pipeline::raw, harness::Pipeline::purify, harness::Pipeline::qnn,
                     harness::Pipeline::purify_qnn}) {
        out.push_back(p);
      }
      continue;
    }
    auto p = harness::parse_pipeline(name);
    if (!p) throw std::invalid_argument("unknown pipeline '" + name + "' (raw, purify, qnn, purify-qnn, all)");
    out.push_back(*p);
  }
  return out;
}

harness::QnnSettings qnn_settings(const Options& o) {
  harness::QnnSettings s;
  if (!o.model.empty()) s.model_path = o.model;
  s.train_at = o.train_at;
  s.retrain_per_p = o.retrain_per_p;
  s.training_size = o.train_size;
  s.hidden_layers = o.hidden;
  s.training.step_size = o.step;
  s.training.max_iters = o.iters;
  s.training.init = init_of(o.init);
  s.training.workers = o.workers;
  return s;
}

harness::SweepConfig sweep_config(const Options& o) {
  harness::SweepConfig cfg;
  cfg.noise = kind_of(o.noise);
  cfg.p_start = o.p_start;
  cfg.p_stop = o.p_stop;
  cfg.p_step = o.p_step;
  cfg.n = o.n;
  cfg.pipelines = pipelines_of(o.pipelines);
  cfg.rounds = o.rounds;
  cfg.qnn = qnn_settings(o);
  cfg.stage = stage_of(o.stage);
  cfg.seed = o.seed;
  if (!o.out.empty()) cfg.out_path = o.out;
  cfg.workers = o.workers;
  cfg.priors = o.optimize_priors ? capacity::PriorMode::optimize : capacity::PriorMode::uniform;
  return cfg;
}

void write_records(const std::vector<harness::SweepRecord>& records, const std::string& out) {
  if (out.empty()) {
    std::cout << harness::format_records(records);
  } else {
    harness::emit_records(records, out);
  }
}

int run_train(const Options& o) {
  const auto pipeline = pipelines_of(o.pipelines).front();
  if (!harness::uses_qnn(pipeline)) throw std::invalid_argument("train needs --pipeline qnn or purify-qnn");
  if (o.out.empty()) throw std::invalid_argument("train needs --out for the model file");
  const auto result = harness::train_corrector(o.n, kind_of(o.noise), o.train_at, pipeline, o.rounds, stage_of(o.stage),
                                               qnn_settings(o), o.seed);
  std::ofstream file(o.out);
  if (!file) throw std::runtime_error("cannot open '" + o.out + "' for writing");
  qnn::save_model(result.model, file);
  if (!file) throw std::runtime_error("failed writing model to '" + o.out + "'");
  const auto& r = result.report;
  std::printf("final_cost %.9f\niterations %d\nconverged %s\ntraining_size %zu\nseed %llu\n", r.final_cost,
              r.iterations, r.converged ? "yes" : "no", r.training_size, static_cast<unsigned long long>(r.seed));
  return 0;
}

int run_purify_demo(const Options& o) {
  const auto kind = kind_of(o.noise);
  const noise::NoiseSpec spec{kind, o.p, noise::NoiseStage::distribution_only};
  const auto raw = sdc::prepare_shared_state(o.n, spec, {});
  std::printf("noise %s p %.6g n %d\n", std::string(noise::to_string(kind)).c_str(), o.p, o.n);
  std::printf("round 0 fidelity %.9f\n", raw.fidelity_distributed);
  for (int k = 1; k <= o.rounds; ++k) {
    const auto shared = sdc::prepare_shared_state(o.n, spec, sdc::Corrector{k, nullptr});
    const auto& pr = *shared.purification;
    std::printf("round %d fidelity %.9f success %.9f\n", k, pr.fidelity_after, pr.success_probability);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GHZ superdense coding with purification and QNN correction"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--noise", o.noise, "amplitude-damping, depolarizing, bit-flip or phase-flip");
    sub->add_option("--n", o.n, "GHZ width");
    sub->add_option("--rounds", o.rounds, "purification rounds");
    sub->add_option("--seed", o.seed, "random seed");
  };
  auto qnn_flags = [&](CLI::App* sub) {
    sub->add_option("--pipeline", o.pipelines, "raw, purify, qnn, purify-qnn or all; comma separated")->delimiter(',');
    sub->add_option("--model", o.model, "QNN model file to load");
    sub->add_option("--noise-stage", o.stage, "dist or both");
    sub->add_option("--train-at", o.train_at, "noise strength for the inline-trained model");
    sub->add_flag("--retrain-per-p", o.retrain_per_p, "train a model at every p");
    sub->add_option("--train-size", o.train_size, "training pairs");
    sub->add_option("--iters", o.iters, "maximum training iterations");
    sub->add_option("--step", o.step, "initial training step size");
    sub->add_option("--hidden", o.hidden, "hidden layers");
    sub->add_option("--init", o.init, "random, identity or passthrough");
    sub->add_option("--workers", o.workers, "worker threads");
    sub->add_option("--out", o.out, "output file");
  };

  auto* sweep = app.add_subcommand("sweep", "sweep noise strength and emit records");
  common(sweep);
  qnn_flags(sweep);
  sweep->add_option("--p-start", o.p_start);
  sweep->add_option("--p-stop", o.p_stop);
  sweep->add_option("--p-step", o.p_step);
  sweep->add_flag("--optimize-priors", o.optimize_priors, "maximize capacities over priors");

  auto* train = app.add_subcommand("train", "train a QNN corrector and save it");
  common(train);
  qnn_flags(train);

  auto* demo = app.add_subcommand("purify-demo", "show fidelity across purification rounds");
  common(demo);
  demo->add_option("--p", o.p, "noise strength");

  auto* cap = app.add_subcommand("capacity", "evaluate one noise point");
  common(cap);
  qnn_flags(cap);
  cap->add_option("--p", o.p, "noise strength");
  cap->add_flag("--optimize-priors", o.optimize_priors, "maximize capacities over priors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    if (*sweep) {
      const auto cfg = sweep_config(o);
      write_records(harness::run_sweep(cfg), o.out);
    } else if (*train) {
      if (train->count("--pipeline") == 0) o.pipelines = {"qnn"};
      return run_train(o);
    } else if (*demo) {
      return run_purify_demo(o);
    } else if (*cap) {
      Options point = o;
      point.p_start = point.p_stop = o.p;
      write_records(harness::run_sweep(sweep_config(point)), o.out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
