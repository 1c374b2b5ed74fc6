#include "ohmgrad/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "ohmgrad/error.hpp"
#include "ohmgrad/rng.hpp"

namespace ohmgrad {

namespace {

// Independent streams of one training seed.
constexpr std::uint64_t kMaskStream = 1;
constexpr std::uint64_t kOrderStream = 2;

void config_fail(const std::string& msg) { fail(Errc::config_error, msg); }

double hinge(double f, int label) { return std::max(0.0, 1.0 - label * f); }

GradientEstimate estimate(const Circuit& c, const Selectors& sel, const Dataset& data, std::size_t k,
                          const TrainConfig& cfg) {
  const Eigen::VectorXd& x = data.inputs[k];
  switch (cfg.estimator) {
    case Estimator::analytical: return analytical_gradient_ls(c, sel, x, data.targets[k], cfg.gamma);
    case Estimator::two_phase: return two_phase_gradient(c, sel, x, data.targets[k], cfg.gamma, cfg.beta);
    case Estimator::two_phase_limit: return two_phase_limit(c, sel, x, data.targets[k], cfg.gamma);
    case Estimator::hinge: return hinge_subgradient(c, sel, x, data.labels[k], cfg.gamma);
    case Estimator::hinge_two_phase: return hinge_two_phase(c, sel, x, data.labels[k], cfg.gamma, cfg.beta);
  }
  fail(Errc::invalid_argument, "unknown estimator");
}

void check_setup(const Circuit& circuit, const Selectors& sel, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.size() == 0) fail(Errc::invalid_argument, "training set is empty");
  if (sel.num_edges() != circuit.num_edges()) fail(Errc::selector_mismatch, "selectors do not match the circuit");
  if (data.input_dim() != sel.num_inputs())
    fail(Errc::dimension_mismatch, "data have " + std::to_string(data.input_dim()) + " inputs; circuit has " +
                                       std::to_string(sel.num_inputs()) + " input edges");
  if (cfg.uses_hinge()) {
    if (data.kind != TaskKind::classification)
      fail(Errc::invalid_argument, std::string(to_string(cfg.estimator)) + " needs classification data");
    if (sel.num_outputs() != 1)
      fail(Errc::wrong_output_count, "hinge training needs exactly one output edge; got " +
                                         std::to_string(sel.num_outputs()));
  } else {
    if (data.kind != TaskKind::regression)
      fail(Errc::invalid_argument, std::string(to_string(cfg.estimator)) + " needs regression data");
    if (data.output_dim() != sel.num_outputs())
      fail(Errc::dimension_mismatch, "targets do not match the output edges");
  }
  if (!(cfg.bounds.min <= cfg.r0 && cfg.r0 <= cfg.bounds.max))
    fail(Errc::config_error, "initial resistance lies outside the clip bounds");
}

}  // namespace

void TrainConfig::validate() const {
  std::ostringstream msg;
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    msg << "eta = " << eta << " must be finite and >= 0";
    config_fail(msg.str());
  }
  if (uses_beta() && !(beta > 0.0 && std::isfinite(beta))) {
    msg << "beta = " << beta << " must be > 0 for estimator " << to_string(estimator);
    config_fail(msg.str());
  }
  if (!std::isfinite(gamma)) config_fail("gamma must be finite");
  if (!(p_freeze >= 0.0 && p_freeze <= 1.0)) {
    msg << "p_freeze = " << p_freeze << " must lie in [0, 1]";
    config_fail(msg.str());
  }
  if (!(bounds.min > 0.0) || !(bounds.max >= bounds.min) || !std::isfinite(bounds.max)) {
    msg << "resistance bounds [" << bounds.min << ", " << bounds.max << "] must satisfy 0 < r_min <= r_max";
    config_fail(msg.str());
  }
  if (!(r0 > 0.0) || !std::isfinite(r0)) config_fail("r0 must be positive");
}

double classification_accuracy(const Circuit& circuit, const Selectors& sel, const Dataset& data, double gamma,
                               Readout readout) {
  if (data.kind != TaskKind::classification) fail(Errc::invalid_argument, "accuracy needs classification data");
  if (readout == Readout::sign && sel.num_outputs() != 1)
    fail(Errc::wrong_output_count, "sign readout needs exactly one output edge");
  if (readout == Readout::argmax && sel.num_outputs() != 2)
    fail(Errc::wrong_output_count, "argmax readout needs exactly two output edges");
  if (data.size() == 0) return NAN;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Eigen::VectorXd out = sel.read_output(solve_voltage_mode(circuit, gamma * sel.embed_input(data.inputs[k])).v);
    const int pred = readout == Readout::sign ? (out(0) >= 0.0 ? 1 : -1) : (out(0) > out(1) ? 1 : -1);
    if (pred == data.labels[k]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double full_batch_loss(const Circuit& circuit, const Selectors& sel, const Dataset& data, double gamma) {
  if (data.size() == 0) return NAN;
  if (data.kind == TaskKind::classification && sel.num_outputs() != 1)
    fail(Errc::wrong_output_count, "hinge loss needs exactly one output edge");
  double total = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Eigen::VectorXd out = sel.read_output(solve_voltage_mode(circuit, gamma * sel.embed_input(data.inputs[k])).v);
    total += data.kind == TaskKind::classification ? hinge(out(0), data.labels[k])
                                                   : least_squares_loss(out, data.targets[k]);
  }
  return total / static_cast<double>(data.size());
}

std::vector<std::uint8_t> draw_mask(std::size_t num_edges, double p_freeze, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kMaskStream));
  std::vector<std::uint8_t> mask(num_edges);
  for (auto& m : mask) m = rng.uniform() >= p_freeze ? 1 : 0;
  return mask;
}

Trajectory train(Circuit& circuit, const Selectors& sel, const Dataset& data, const TrainConfig& cfg) {
  check_setup(circuit, sel, data, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t E = circuit.num_edges();

  Trajectory traj;
  traj.mask = draw_mask(E, cfg.p_freeze, cfg.seed);
  traj.initial_r = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(E), cfg.r0);
  circuit.set_resistances(traj.initial_r);
  traj.step_loss.reserve(cfg.steps);

  auto record = [&](std::size_t step) {
    TrainRecord rec;
    rec.step = step;
    rec.loss = full_batch_loss(circuit, sel, data, cfg.gamma);
    if (data.kind == TaskKind::classification && sel.num_outputs() == 1)
      rec.accuracy = classification_accuracy(circuit, sel, data, cfg.gamma);
    rec.r = circuit.resistances();
    traj.records.push_back(std::move(rec));
  };

  Rng order_rng(derive_seed(cfg.seed, kOrderStream));
  std::vector<std::size_t> order(data.size());
  std::size_t cursor = order.size();
  Eigen::VectorXd r = traj.initial_r;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t k = order.size(); k > 1; --k)
        std::swap(order[k - 1], order[static_cast<std::size_t>(order_rng.index(k))]);
      cursor = 0;
    }
    const GradientEstimate g = estimate(circuit, sel, data, order[cursor++], cfg);
    if (!std::isfinite(g.loss) || !g.g.allFinite()) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << " (loss " << g.loss << ")";
      fail(Errc::divergence, msg.str());
    }
    traj.step_loss.push_back(g.loss);
    for (std::size_t e = 0; e < E; ++e) {
      if (!traj.mask[e]) continue;
      const auto k = static_cast<Eigen::Index>(e);
      r(k) = std::clamp(r(k) - cfg.eta * g.g(k), cfg.bounds.min, cfg.bounds.max);
    }
    circuit.set_resistances(r);
    if (cfg.record_every > 0 && step % cfg.record_every == 0) record(step);
  }
  if (cfg.record_every == 0 || cfg.steps % cfg.record_every != 0 || cfg.steps == 0) record(cfg.steps);
  traj.final_r = r;
  traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return traj;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OHMGRAD_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

namespace {

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < count;) body(k);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

SweepReport freeze_sweep(const CircuitFactory& factory, const Selectors& sel, const Dataset& train_data,
                         const Dataset& eval, const TrainConfig& cfg, const std::vector<double>& p_list,
                         std::size_t trials, std::size_t threads, Readout readout) {
  if (trials == 0) fail(Errc::invalid_argument, "sweep needs at least one trial");
  cfg.validate();
  SweepReport report;
  for (const double p : p_list)
    for (std::size_t t = 0; t < trials; ++t) {
      SweepTrial tr;
      tr.p_freeze = p;
      tr.trial = t;
      tr.seed = derive_seed(cfg.seed, t);
      report.trials.push_back(tr);
    }

  parallel_for(report.trials.size(), resolve_threads(threads), [&](std::size_t k) {
    SweepTrial& tr = report.trials[k];
    try {
      Circuit circuit = factory();
      circuit.set_resistances(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(circuit.num_edges()), cfg.r0));
      tr.baseline_accuracy = classification_accuracy(circuit, sel, eval, cfg.gamma, readout);
      TrainConfig c = cfg;
      c.p_freeze = tr.p_freeze;
      c.seed = tr.seed;
      c.record_every = 0;
      const Trajectory traj = train(circuit, sel, train_data, c);
      for (std::size_t e = 0; e < traj.mask.size(); ++e)
        if (!traj.mask[e]) {
          ++tr.frozen;
          const auto i = static_cast<Eigen::Index>(e);
          if (traj.final_r(i) != traj.initial_r(i)) tr.frozen_unchanged = false;
        }
      tr.accuracy = classification_accuracy(circuit, sel, eval, cfg.gamma, readout);
    } catch (const std::exception& ex) {
      tr.error = ex.what();
    }
  });

  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    SweepSummary s;
    s.estimator = cfg.estimator;
    s.p_freeze = p_list[pi];
    std::vector<double> acc;
    for (std::size_t t = 0; t < trials; ++t) {
      const SweepTrial& tr = report.trials[pi * trials + t];
      if (tr.error.empty()) acc.push_back(tr.accuracy);
    }
    s.trials = acc.size();
    if (!acc.empty()) {
      const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
      double ss = 0.0;
      for (const double a : acc) ss += (a - mean) * (a - mean);
      s.mean_accuracy = mean;
      s.std_accuracy = acc.size() > 1 ? std::sqrt(ss / static_cast<double>(acc.size() - 1)) : 0.0;
    }
    report.summary.push_back(s);
  }
  return report;
}

Landscape landscape_sample(const Trajectory& traj, const CircuitFactory& factory, const Selectors& sel,
                           const Dataset& data, double gamma, double range, std::size_t resolution) {
  if (traj.records.size() < 3) fail(Errc::invalid_argument, "landscape needs at least 3 resistance snapshots");
  if (resolution == 0) fail(Errc::invalid_argument, "landscape resolution must be >= 1");
  if (!(range > 0.0)) fail(Errc::invalid_argument, "landscape range must be positive");
  const Eigen::VectorXd& r0 = traj.initial_r;
  const auto E = r0.size();
  const auto T = static_cast<Eigen::Index>(traj.records.size());
  Eigen::MatrixXd D(T, E);
  for (Eigen::Index t = 0; t < T; ++t) D.row(t) = (traj.records[static_cast<std::size_t>(t)].r - r0).transpose();

  Landscape out;
  out.r0 = r0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 1e-14 * std::max(1.0, r0.norm()))
    fail(Errc::degenerate_directions, "resistance snapshots do not move away from r0");
  auto fixed_sign = [](Eigen::VectorXd d) {
    Eigen::Index arg = 0;
    d.cwiseAbs().maxCoeff(&arg);
    return d(arg) < 0.0 ? Eigen::VectorXd(-d) : d;
  };
  out.delta1 = fixed_sign(svd.matrixV().col(0));
  if (svd.matrixV().cols() > 1) {
    out.delta2 = fixed_sign(svd.matrixV().col(1));
    out.singular_values = {sv(0), sv(1)};
  } else {
    // A single-edge circuit has no second direction.
    out.delta2 = Eigen::VectorXd::Zero(E);
    out.singular_values = {sv(0), 0.0};
  }

  Circuit circuit = factory();
  const ResistanceBounds b = circuit.bounds();
  auto axis = [&](std::size_t k) {
    if (resolution == 1) return 0.0;
    return -range + 2.0 * range * static_cast<double>(k) / static_cast<double>(resolution - 1);
  };
  for (std::size_t a = 0; a < resolution; ++a)
    for (std::size_t c = 0; c < resolution; ++c) {
      const double q1 = axis(a), q2 = axis(c);
      const Eigen::VectorXd r = (r0 + q1 * out.delta1 + q2 * out.delta2).cwiseMax(b.min).cwiseMin(b.max);
      circuit.set_resistances(r);
      out.grid.push_back({q1, q2, full_batch_loss(circuit, sel, data, gamma)});
    }
  out.path.push_back({0, 0.0, 0.0});
  for (const auto& rec : traj.records) {
    const Eigen::VectorXd d = rec.r - r0;
    out.path.push_back({rec.step, d.dot(out.delta1), d.dot(out.delta2)});
  }
  return out;
}

}  // namespace ohmgrad
