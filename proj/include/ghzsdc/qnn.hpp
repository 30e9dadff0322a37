// Dissipative feed-forward quantum neural network.
//
// Layout: layer s (0 = input, 1..L hidden, L+1 output) owns qubits
// [s*n, s*n + n). Perceptron j of transition l acts on all n qubits of layer l
// plus qubit j of layer l+1 (its local lowest qubit). Within a transition the
// perceptrons apply in order j = 0, 1, ..., n-1.
//
// The whole network is simulated as one pure state; mixed inputs are fed as
// their eigen-ensemble, which is exact because the layer map is linear.
#pragma once

#include "ghzsdc/noise.hpp"
#include "ghzsdc/qcore.hpp"
#include "ghzsdc/random.hpp"
#include "ghzsdc/sdc.hpp"

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ghzsdc::qnn {

inline constexpr int kMaxNetworkQubits = 20;
inline constexpr int kMaxSupportedWidth = 5;
inline constexpr int kMaxTrainableWidth = 6;

struct NetworkArchitecture {
  int width = 1;          // n, shared by every layer
  int hidden_layers = 1;  // L

  int transitions() const { return hidden_layers + 1; }
  int layer_count() const { return hidden_layers + 2; }
  int total_qubits() const { return width * layer_count(); }
  int perceptron_qubits() const { return width + 1; }

  void validate() const {
    if (width < 1) throw std::invalid_argument("network width must be >= 1");
    if (hidden_layers < 1) throw std::invalid_argument("network needs at least one hidden layer");
    if (total_qubits() > kMaxNetworkQubits) {
      throw std::invalid_argument("network needs " + std::to_string(total_qubits()) + " qubits; at most " +
                                  std::to_string(kMaxNetworkQubits) + " are simulated");
    }
  }

  friend bool operator==(const NetworkArchitecture&, const NetworkArchitecture&) = default;
};

enum class Initialization {
  random,       // exp(iH), H Hermitian with entries uniform in [-0.1, 0.1]
  identity,     // every perceptron is the identity
  passthrough,  // perceptron j swaps qubit j of its layer into its fresh qubit
};

class QnnModel {
 public:
  QnnModel(NetworkArchitecture arch, std::vector<std::vector<Unitary>> perceptrons)
      : arch_(arch), perceptrons_(std::move(perceptrons)) {
    arch_.validate();
    if (static_cast<int>(perceptrons_.size()) != arch_.transitions()) {
      throw std::invalid_argument("expected " + std::to_string(arch_.transitions()) + " perceptron layers");
    }
    for (const auto& layer : perceptrons_) {
      if (static_cast<int>(layer.size()) != arch_.width) {
        throw std::invalid_argument("each layer needs " + std::to_string(arch_.width) + " perceptrons");
      }
      for (const auto& u : layer) {
        if (u.qubit_count() != arch_.perceptron_qubits()) {
          throw std::invalid_argument("perceptron acts on " + std::to_string(u.qubit_count()) + " qubits, expected " +
                                      std::to_string(arch_.perceptron_qubits()));
        }
      }
    }
  }

  static QnnModel initialized(NetworkArchitecture arch, Initialization init, std::uint64_t seed = 0) {
    arch.validate();
    const int k = arch.perceptron_qubits();
    const Eigen::Index d = Eigen::Index{1} << k;
    Rng rng(seed);
    std::vector<std::vector<Unitary>> layers;
    for (int l = 0; l < arch.transitions(); ++l) {
      std::vector<Unitary> layer;
      for (int j = 0; j < arch.width; ++j) {
        switch (init) {
          case Initialization::identity: layer.push_back(Unitary::identity(k)); break;
          case Initialization::passthrough: layer.push_back(swap_into_fresh(arch.width, j)); break;
          case Initialization::random: {
            Matrix h(d, d);
            for (Eigen::Index r = 0; r < d; ++r) {
              h(r, r) = rng.uniform(-0.1, 0.1);
              for (Eigen::Index c = r + 1; c < d; ++c) {
                const double re = rng.uniform(-0.1, 0.1);
                const double im = rng.uniform(-0.1, 0.1);
                h(r, c) = cplx(re, im);
                h(c, r) = cplx(re, -im);
              }
            }
            layer.push_back(exp_i_hermitian(h, 1.0));
            break;
          }
        }
      }
      layers.push_back(std::move(layer));
    }
    return QnnModel(arch, std::move(layers));
  }

  /// exp(i * eps * H) for Hermitian H, via its eigendecomposition.
  static Unitary exp_i_hermitian(const Matrix& h, double eps) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const Matrix& v = solver.eigenvectors();
    Vector phases(solver.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, eps * solver.eigenvalues()(i));
    return Unitary(v * phases.asDiagonal() * v.adjoint(), 1e-9);
  }

  /// Swap of local qubit j with the local fresh qubit (index n) on n+1 qubits.
  static Unitary swap_into_fresh(int n, int j) {
    const Eigen::Index d = Eigen::Index{1} << (n + 1);
    const int bj = n - j;  // bit position of local qubit j; the fresh qubit is bit 0
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const std::size_t a = (u >> bj) & 1U;
      const std::size_t b = u & 1U;
      std::size_t t = u & ~((std::size_t{1} << bj) | std::size_t{1});
      t |= (b << bj) | a;
      m(static_cast<Eigen::Index>(t), i) = 1.0;
    }
    return Unitary(std::move(m));
  }

  const NetworkArchitecture& architecture() const { return arch_; }
  const std::vector<std::vector<Unitary>>& perceptrons() const { return perceptrons_; }
  const Unitary& perceptron(int layer, int j) const {
    return perceptrons_.at(static_cast<std::size_t>(layer)).at(static_cast<std::size_t>(j));
  }
  void set_perceptron(int layer, int j, Unitary u) {
    if (u.qubit_count() != arch_.perceptron_qubits()) throw std::invalid_argument("perceptron width mismatch");
    perceptrons_.at(static_cast<std::size_t>(layer)).at(static_cast<std::size_t>(j)) = std::move(u);
  }

  /// Network qubits touched by perceptron j of transition l.
  std::vector<int> targets(int layer, int j) const {
    std::vector<int> t;
    const int n = arch_.width;
    for (int q = 0; q < n; ++q) t.push_back(layer * n + q);
    t.push_back((layer + 1) * n + j);
    return t;
  }

  /// Layer operator U^l = U_{n-1}^l ... U_0^l as one matrix on the 2n qubits of layers l and l+1.
  Matrix layer_operator(int layer) const {
    const int n = arch_.width;
    const Eigen::Index d = Eigen::Index{1} << (2 * n);
    Matrix out = Matrix::Identity(d, d);
    for (int j = 0; j < n; ++j) {
      std::vector<int> t;
      for (int q = 0; q < n; ++q) t.push_back(q);
      t.push_back(n + j);
      for (Eigen::Index c = 0; c < d; ++c) detail::apply_local(out.col(c).data(), 2 * n, perceptron(layer, j).matrix(), t);
    }
    return out;
  }

 private:
  NetworkArchitecture arch_;
  std::vector<std::vector<Unitary>> perceptrons_;
};

struct TrainingPair {
  StateVector input;
  StateVector target;
};

using TrainingSet = std::vector<TrainingPair>;

struct TrainingOptions {
  double step_size = 0.1;
  int max_iters = 200;
  double tol = 1e-7;
  std::uint64_t seed = 0;
  Initialization init = Initialization::random;
  double min_step = 1e-9;
  unsigned workers = 1;
};

struct TrainingReport {
  std::vector<double> cost_history;  // entry 0 is the initial cost
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_step_size = 0.0;
  std::size_t training_size = 0;
  std::uint64_t seed = 0;
};

namespace detail {

using Amplitudes = std::vector<cplx>;

inline Amplitudes embed_input(const QnnModel& model, const Vector& psi) {
  const auto& arch = model.architecture();
  const int shift = arch.total_qubits() - arch.width;
  Amplitudes a(std::size_t{1} << arch.total_qubits(), cplx{0.0});
  for (Eigen::Index i = 0; i < psi.size(); ++i) a[static_cast<std::size_t>(i) << shift] = psi(i);
  return a;
}

inline void forward(const QnnModel& model, Amplitudes& a) {
  const auto& arch = model.architecture();
  for (int l = 0; l < arch.transitions(); ++l) {
    for (int j = 0; j < arch.width; ++j) {
      const auto t = model.targets(l, j);
      ghzsdc::detail::apply_local(a.data(), arch.total_qubits(), model.perceptron(l, j).matrix(), t);
    }
  }
}

/// Output-register density matrix (the lowest n qubits) of a full network state.
inline Matrix output_density(const Amplitudes& a, int width) {
  const std::size_t dout = std::size_t{1} << width;
  const std::size_t rest = a.size() / dout;
  Eigen::Map<const Matrix> m(a.data(), static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(rest));
  return m * m.adjoint();
}

/// <t| rho_out |t> without forming rho_out.
inline double output_overlap(const Amplitudes& a, const Vector& target) {
  const auto dout = static_cast<Eigen::Index>(target.size());
  const auto rest = static_cast<Eigen::Index>(a.size()) / dout;
  Eigen::Map<const Matrix> m(a.data(), dout, rest);
  return (target.adjoint() * m).squaredNorm();
}

/// R = tr_rest(|a><b|) restricted to `targets`.
inline Matrix local_cross(const Amplitudes& a, const Amplitudes& b, int qubits, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::size_t local = std::size_t{1} << k;
  std::vector<std::size_t> offsets(local, 0);
  std::size_t mask = 0;
  for (std::size_t l = 0; l < local; ++l) {
    for (int t = 0; t < k; ++t) {
      if ((l >> (k - 1 - t)) & 1U) offsets[l] |= std::size_t{1} << (qubits - 1 - targets[t]);
    }
  }
  for (int t = 0; t < k; ++t) mask |= std::size_t{1} << (qubits - 1 - targets[t]);

  Matrix r = Matrix::Zero(static_cast<Eigen::Index>(local), static_cast<Eigen::Index>(local));
  Vector va(static_cast<Eigen::Index>(local)), vb(static_cast<Eigen::Index>(local));
  for (std::size_t base = 0; base < a.size(); ++base) {
    if (base & mask) continue;
    for (std::size_t l = 0; l < local; ++l) {
      va(static_cast<Eigen::Index>(l)) = a[base | offsets[l]];
      vb(static_cast<Eigen::Index>(l)) = b[base | offsets[l]];
    }
    r.noalias() += va * vb.adjoint();
  }
  return r;
}

/// Per-perceptron generators G with dC_x/d(eps) = tr(K G) for U <- exp(i eps K) U, for one pair.
inline std::vector<Matrix> pair_generators(const QnnModel& model, const TrainingPair& pair, double& cost_out) {
  const auto& arch = model.architecture();
  const int q = arch.total_qubits();
  const int n = arch.width;

  Amplitudes a = embed_input(model, pair.input.amplitudes());
  forward(model, a);
  cost_out = output_overlap(a, pair.target.amplitudes());

  // b = (I_rest (x) |t><t|) a
  const Vector& t = pair.target.amplitudes();
  const std::size_t dout = std::size_t{1} << n;
  Amplitudes b(a.size());
  for (std::size_t rest = 0; rest < a.size() / dout; ++rest) {
    cplx proj = 0.0;
    for (std::size_t r = 0; r < dout; ++r) proj += std::conj(t(static_cast<Eigen::Index>(r))) * a[rest * dout + r];
    for (std::size_t r = 0; r < dout; ++r) b[rest * dout + r] = t(static_cast<Eigen::Index>(r)) * proj;
  }

  std::vector<Matrix> gens(static_cast<std::size_t>(arch.transitions() * n));
  for (int l = arch.transitions() - 1; l >= 0; --l) {
    for (int j = n - 1; j >= 0; --j) {
      const auto targets = model.targets(l, j);
      const Matrix r = local_cross(a, b, q, targets);
      gens[static_cast<std::size_t>(l * n + j)] = cplx(0, 1) * (r - r.adjoint());
      const Matrix inv = model.perceptron(l, j).matrix().adjoint();
      ghzsdc::detail::apply_local(a.data(), q, inv, targets);
      ghzsdc::detail::apply_local(b.data(), q, inv, targets);
    }
  }
  return gens;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline void check_width(const QnnModel& model, int qubits) {
  if (qubits != model.architecture().width) {
    throw std::invalid_argument("QNN expects " + std::to_string(model.architecture().width) +
                                "-qubit inputs, got " + std::to_string(qubits));
  }
}

/// Output state for a pure input.
inline DensityOperator feedforward(const QnnModel& model, const StateVector& psi) {
  check_width(model, psi.qubit_count());
  auto a = detail::embed_input(model, psi.amplitudes());
  detail::forward(model, a);
  return DensityOperator(detail::output_density(a, model.architecture().width), DensityOperator::Unchecked{});
}

inline DensityOperator feedforward(const QnnModel& model, const DensityOperator& rho_in) {
  check_width(model, rho_in.qubit_count());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_in.matrix());
  const Eigen::Index d = rho_in.dim();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double w = solver.eigenvalues()(k);
    if (w <= kEigenFloor) continue;
    auto a = detail::embed_input(model, solver.eigenvectors().col(k));
    detail::forward(model, a);
    out += w * detail::output_density(a, model.architecture().width);
  }
  out /= out.trace().real();
  return DensityOperator(std::move(out), DensityOperator::Unchecked{});
}

/// The trained network used as a noise corrector.
inline DensityOperator correct_state(const QnnModel& model, const DensityOperator& rho) { return feedforward(model, rho); }

inline void check_training_set(const QnnModel& model, const TrainingSet& set) {
  if (set.empty()) throw std::invalid_argument("training set is empty");
  for (const auto& pair : set) {
    check_width(model, pair.input.qubit_count());
    check_width(model, pair.target.qubit_count());
  }
}

/// Mean over pairs of <target| rho_out |target>.
inline double cost(const QnnModel& model, const TrainingSet& set, unsigned workers = 1) {
  check_training_set(model, set);
  std::vector<double> per(set.size());
  detail::parallel_for(set.size(), workers, [&](std::size_t i) {
    auto a = detail::embed_input(model, set[i].input.amplitudes());
    detail::forward(model, a);
    per[i] = detail::output_overlap(a, set[i].target.amplitudes());
  });
  double c = 0.0;
  for (double v : per) c += v;
  return std::clamp(c / static_cast<double>(set.size()), 0.0, 1.0);
}

/// Ascent generators for every perceptron, averaged over the set. Index l*n + j.
/// Moving perceptron g along exp(i eps K) changes the cost at rate tr(K G_g).
inline std::vector<Matrix> cost_gradient(const QnnModel& model, const TrainingSet& set, unsigned workers = 1,
                                         double* cost_out = nullptr) {
  check_training_set(model, set);
  std::vector<std::vector<Matrix>> per(set.size());
  std::vector<double> costs(set.size());
  detail::parallel_for(set.size(), workers,
                       [&](std::size_t i) { per[i] = detail::pair_generators(model, set[i], costs[i]); });
  std::vector<Matrix> total = per.front();
  for (std::size_t i = 1; i < per.size(); ++i) {
    for (std::size_t g = 0; g < total.size(); ++g) total[g] += per[i][g];
  }
  for (auto& g : total) g /= static_cast<double>(set.size());
  if (cost_out) {
    double c = 0.0;
    for (double v : costs) c += v;
    *cost_out = c / static_cast<double>(set.size());
  }
  return total;
}

inline QnnModel apply_update(const QnnModel& model, const std::vector<Matrix>& generators, double eps) {
  QnnModel next = model;
  const int n = model.architecture().width;
  for (int l = 0; l < model.architecture().transitions(); ++l) {
    for (int j = 0; j < n; ++j) {
      const Unitary step = QnnModel::exp_i_hermitian(generators[static_cast<std::size_t>(l * n + j)], eps);
      next.set_perceptron(l, j, Unitary(step.matrix() * model.perceptron(l, j).matrix(), 1e-9));
    }
  }
  return next;
}

struct TrainingResult {
  QnnModel model;
  TrainingReport report;
};

/// Gradient ascent on the cost; a step that lowers the cost is rejected and the step size halved.
/// Each perceptron moves by exp(i * eps * 2^n * G): the 2^n factor is the dimension
/// of the layer traced out behind it, which keeps step sizes comparable across widths.
inline TrainingResult train(const NetworkArchitecture& arch, const TrainingSet& set, const TrainingOptions& opt) {
  if (arch.width > kMaxTrainableWidth) {
    throw std::domain_error("QNN training is refused for width " + std::to_string(arch.width) +
                            " > " + std::to_string(kMaxTrainableWidth) + ": training does not converge at this size");
  }
  arch.validate();
  if (!(opt.step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (opt.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

  QnnModel model = QnnModel::initialized(arch, opt.init, opt.seed);
  check_training_set(model, set);

  TrainingReport report;
  report.training_size = set.size();
  report.seed = opt.seed;
  double current = 0.0;
  auto grads = cost_gradient(model, set, opt.workers, &current);
  current = std::clamp(current, 0.0, 1.0);
  report.cost_history.push_back(current);

  double eps = opt.step_size;
  const double layer_scale = static_cast<double>(std::size_t{1} << arch.width);
  if (current >= 1.0 - 1e-12) {
    report.converged = true;
  }
  while (!report.converged && report.iterations < opt.max_iters) {
    ++report.iterations;
    QnnModel candidate = apply_update(model, grads, eps * layer_scale);
    const double next = cost(candidate, set, opt.workers);
    if (next < current - 1e-12) {
      eps *= 0.5;
      if (eps < opt.min_step) {
        report.converged = true;
        break;
      }
      continue;
    }
    const double delta = next - current;
    model = std::move(candidate);
    current = next;
    report.cost_history.push_back(current);
    if (std::abs(delta) < opt.tol) {
      report.converged = true;
      break;
    }
    grads = cost_gradient(model, set, opt.workers);
  }
  report.final_cost = current;
  report.final_step_size = eps;
  return {std::move(model), std::move(report)};
}

/// Pure training inputs: Kraus trajectories of |Psi_1> through `ch` on `noisy_qubits`,
/// each paired with the clean |Psi_1>.
inline TrainingSet distribution_training_set(int n, const QuantumChannel& ch, std::span<const int> noisy_qubits,
                                             std::size_t count, std::uint64_t seed) {
  const StateVector ideal = sdc::ghz_state(n);
  TrainingSet set;
  set.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    StateVector psi = ideal;
    for (std::size_t t = 0; t < noisy_qubits.size(); ++t) {
      const int q = noisy_qubits[t];
      psi = noise::sample_trajectory(psi, ch, {q}, mix_seed(seed, k * noisy_qubits.size() + t));
    }
    set.push_back({std::move(psi), ideal});
  }
  return set;
}

/// Pure training inputs sampled from the eigen-ensemble of a (possibly post-processed) shared state.
inline TrainingSet mixture_training_set(const DensityOperator& rho, const StateVector& target, std::size_t count,
                                        std::uint64_t seed) {
  TrainingSet set;
  set.reserve(count);
  for (std::size_t k = 0; k < count; ++k) set.push_back({noise::sample_eigenstate(rho, mix_seed(seed, k)), target});
  return set;
}

// ---- model file ----------------------------------------------------------
//
// line 1: "qnnmodel 1"
// line 2: "n L"
// then for each of the L+1 perceptron layers, for each of its n perceptrons:
// "dim d" followed by d*d lines "re im" in row-major order.

class ModelFormatError : public std::runtime_error {
 public:
  ModelFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("model file line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline void save_model(const QnnModel& model, std::ostream& out) {
  const auto& arch = model.architecture();
  out << "qnnmodel 1\n" << arch.width << ' ' << arch.hidden_layers << '\n';
  char buf[96];
  for (const auto& layer : model.perceptrons()) {
    for (const auto& u : layer) {
      out << "dim " << u.dim() << '\n';
      for (Eigen::Index r = 0; r < u.dim(); ++r) {
        for (Eigen::Index c = 0; c < u.dim(); ++c) {
          std::snprintf(buf, sizeof buf, "%.17g %.17g\n", u.matrix()(r, c).real(), u.matrix()(r, c).imag());
          out << buf;
        }
      }
    }
  }
}

inline QnnModel load_model(std::istream& in) {
  std::size_t lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) throw ModelFormatError(lineno + 1, "unexpected end of file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "qnnmodel 1") throw ModelFormatError(lineno, "expected header 'qnnmodel 1'");

  NetworkArchitecture arch;
  {
    std::istringstream ss(next_line());
    std::string extra;
    if (!(ss >> arch.width >> arch.hidden_layers) || (ss >> extra)) {
      throw ModelFormatError(lineno, "expected 'n L'");
    }
    try {
      arch.validate();
    } catch (const std::exception& e) {
      throw ModelFormatError(lineno, e.what());
    }
  }

  const Eigen::Index d = Eigen::Index{1} << arch.perceptron_qubits();
  std::vector<std::vector<Unitary>> layers;
  for (int l = 0; l < arch.transitions(); ++l) {
    std::vector<Unitary> layer;
    for (int j = 0; j < arch.width; ++j) {
      {
        std::istringstream ss(next_line());
        std::string tag, extra;
        long long dim = 0;
        if (!(ss >> tag >> dim) || tag != "dim" || (ss >> extra)) throw ModelFormatError(lineno, "expected 'dim d'");
        if (dim != d) throw ModelFormatError(lineno, "perceptron dimension " + std::to_string(dim) + ", expected " + std::to_string(d));
      }
      const std::size_t start = lineno + 1;
      Matrix m(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
          std::istringstream ss(next_line());
          double re = 0, im = 0;
          std::string extra;
          if (!(ss >> re >> im) || (ss >> extra)) throw ModelFormatError(lineno, "expected 're im'");
          m(r, c) = cplx(re, im);
        }
      }
      try {
        layer.emplace_back(std::move(m), 1e-9);
      } catch (const std::exception&) {
        throw ModelFormatError(start, "perceptron " + std::to_string(j) + " of layer " + std::to_string(l) +
                                          " is not unitary");
      }
    }
    layers.push_back(std::move(layer));
  }
  if (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw ModelFormatError(lineno, "trailing content");
  }
  return QnnModel(arch, std::move(layers));
}

}  // namespace ghzsdc::qnn
