// ohmgrad command-line driver.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "config.hpp"
#include "ohmgrad/error.hpp"
#include "ohmgrad/experiments.hpp"
#include "ohmgrad/gep.hpp"
#include "ohmgrad/io.hpp"
#include "ohmgrad/topology.hpp"
#include "ohmgrad/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ohmgrad;
using namespace ohmgrad::cli;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kInput = 3,
  kNumerical = 4,
  kDivergence = 5,
  kVerifyFailed = 6,
};

constexpr const char* kExitHelp =
    "Exit codes: 0 ok, 1 other error, 2 configuration/usage, 3 input file (missing, unparsable, wrong schema),\n"
    "4 numerical failure, 5 training divergence, 6 verification check failed.";

int exit_code(Errc c) {
  switch (c) {
    case Errc::config_error:
    case Errc::invalid_argument:
    case Errc::index_out_of_range:
    case Errc::duplicate_index:
    case Errc::selector_overlap:
    case Errc::selector_mismatch:
    case Errc::insufficient_chords:
    case Errc::sparse_deposition:
    case Errc::wrong_output_count:
    case Errc::zero_nudge:
    case Errc::dimension_mismatch:
    case Errc::resistance_out_of_bounds:
    case Errc::nonpositive_resistance:
    case Errc::invalid_graph:
    case Errc::disconnected_graph: return kConfig;
    case Errc::io_error:
    case Errc::parse_error:
    case Errc::schema_error: return kInput;
    case Errc::numerical:
    case Errc::non_finite:
    case Errc::not_psd:
    case Errc::non_convergence:
    case Errc::instability:
    case Errc::degenerate_fit:
    case Errc::degenerate_directions:
    case Errc::invariant_violation: return kNumerical;
    case Errc::divergence: return kDivergence;
  }
  return kOther;
}

/// Owns the output directory for one invocation; removes what it wrote if the
/// command fails.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    created_ = !fs::exists(dir_);
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) fail(Errc::io_error, "cannot create output directory " + dir_.string());
  }

  std::string path(const std::string& name) {
    const fs::path p = dir_ / name;
    files_.push_back(p);
    return p.string();
  }

  void csv(const std::string& name, const CsvTable& t) {
    const std::string p = path(name);
    t.write(p);
    validate_csv(p, t.header());
  }

  void json_file(const std::string& name, const json& j) { write_text_file(path(name), j.dump(2) + "\n"); }

  void rollback() {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    if (created_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& f : files_) out.push_back(f.filename().string());
    return out;
  }

 private:
  fs::path dir_;
  bool created_ = false;
  std::vector<fs::path> files_;
};

struct Topology {
  std::optional<NanowireNetwork> network;
  std::optional<CircuitGraph> graph;
};

Topology build_topology(const RunConfig& c) {
  Topology t;
  switch (c.topology.kind) {
    case TopologySpec::Kind::grid: t.graph = grid_graph(c.topology.rows, c.topology.cols); break;
    case TopologySpec::Kind::nanowire:
      t.network = generate_nanowire_network(c.topology.n, c.topology.l, c.topology.seed);
      t.graph = t.network->graph;
      break;
    case TopologySpec::Kind::file: {
      const json j = read_json_file(c.topology.path);
      try {
        t.graph = graph_from_json(j.contains("graph") ? j.at("graph") : j);
      } catch (const Error& e) {
        if (e.code() == Errc::schema_error) fail(Errc::schema_error, c.topology.path + ": " + e.what());
        throw;
      }
      break;
    }
    case TopologySpec::Kind::none: fail(Errc::config_error, "no topology configured");
  }
  return t;
}

Selectors build_selectors(const RunConfig& c, const CircuitGraph& g) {
  if (!c.selectors.automatic) return make_selectors(g, c.selectors.input, c.selectors.output);
  return choose_io_edges(g, c.selectors.n_in, c.selectors.n_out, c.selectors.seed);
}

struct Data {
  Dataset train;
  Dataset eval;
  std::vector<std::string> warnings;
};

Data build_data(const RunConfig& c) {
  Data d;
  if (c.data.kind == DataSpec::Kind::regression) {
    d.train = gen_regression(c.data.inputs, c.data.outputs, c.data.sigma, c.data.count, c.data.seed);
    d.eval = d.train;
    return d;
  }
  const Dataset raw = load_wdbc(c.data.path);
  const Split split = stratified_split(raw.labels, c.data.train_fraction, c.data.seed);
  const Dataset tr = raw.subset(split.train), te = raw.subset(split.test);
  const PcaModel pca = pca_fit(tr.input_matrix(), c.data.pca);
  d.warnings = pca.warnings;
  d.train = with_inputs(tr, pca.transform(tr.input_matrix()));
  d.eval = with_inputs(te, pca.transform(te.input_matrix()));
  return d;
}

void check_selector_counts(const Selectors& sel, const Data& d) {
  if (sel.num_inputs() != d.train.input_dim() || sel.num_outputs() != d.train.output_dim())
    fail(Errc::config_error, "selectors give " + std::to_string(sel.num_inputs()) + " inputs / " +
                                 std::to_string(sel.num_outputs()) + " outputs; data need " +
                                 std::to_string(d.train.input_dim()) + " / " + std::to_string(d.train.output_dim()));
}

// ---- commands ---------------------------------------------------------------

int cmd_gen(const RunConfig& c, OutputDir& out) {
  const Topology t = build_topology(c);
  std::optional<Selectors> sel;
  if (c.selectors_given) sel = build_selectors(c, *t.graph);
  json j;
  if (t.network) {
    j = network_to_json(*t.network, sel ? &*sel : nullptr);
  } else {
    j["graph"] = graph_to_json(*t.graph);
    if (sel) j["selectors"] = {{"input", sel->input()}, {"output", sel->output()}};
    j["seed"] = c.seed;
  }
  out.json_file("network.json", j);
  std::cout << "nodes " << t.graph->num_nodes() << ", edges " << t.graph->num_edges() << ", cycles "
            << t.graph->num_cycles() << "\n";
  return kOk;
}

CsvTable run_table(const Trajectory& traj) {
  CsvTable t({"step", "loss", "accuracy"});
  for (const auto& r : traj.records) t.add({fmt(r.step), fmt(r.loss), fmt(r.accuracy)});
  return t;
}

CsvTable step_table(const Trajectory& traj) {
  CsvTable t({"step", "sample_loss"});
  for (std::size_t k = 0; k < traj.step_loss.size(); ++k) t.add({fmt(k + 1), fmt(traj.step_loss[k])});
  return t;
}

int cmd_train(const RunConfig& c, OutputDir& out) {
  const Topology t = build_topology(c);
  const Data d = build_data(c);
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
  const Selectors sel = build_selectors(c, *t.graph);
  check_selector_counts(sel, d);
  Circuit circuit = Circuit::homogeneous(*t.graph, c.train.r0, c.train.bounds);
  const Trajectory traj = train(circuit, sel, d.train, c.train);

  out.csv("run.csv", run_table(traj));
  out.csv("steps.csv", step_table(traj));
  json state = circuit_to_json(circuit);
  state["selectors"] = {{"input", sel.input()}, {"output", sel.output()}};
  out.json_file("circuit.json", state);

  json summary = {{"estimator", to_string(c.train.estimator)},
                  {"final_loss", traj.records.back().loss},
                  {"frozen_edges", std::count(traj.mask.begin(), traj.mask.end(), 0)}};
  if (d.train.kind == TaskKind::classification) {
    summary["train_accuracy"] = classification_accuracy(circuit, sel, d.train, c.train.gamma);
    summary["test_accuracy"] = classification_accuracy(circuit, sel, d.eval, c.train.gamma);
  } else {
    const IoMap io = io_map(circuit, sel, c.train.gamma);
    summary["frobenius_error"] = (io.W - d.train.true_map).norm();
    summary["io_rank"] = io.rank;
  }
  out.json_file("summary.json", summary);
  std::cout << summary.dump() << "\n";
  return kOk;
}

int cmd_freeze_sweep(const RunConfig& c, OutputDir& out) {
  const Topology t = build_topology(c);
  const Data d = build_data(c);
  if (d.train.kind != TaskKind::classification) fail(Errc::config_error, "freeze-sweep needs classification (wdbc) data");
  const Selectors sel = build_selectors(c, *t.graph);
  check_selector_counts(sel, d);
  const CircuitGraph g = *t.graph;
  const TrainConfig base = c.train;
  const CircuitFactory factory = [&] { return Circuit::homogeneous(g, base.r0, base.bounds); };

  CsvTable summary({"estimator", "p_freeze", "mean_acc", "std_acc", "trials"});
  CsvTable trials({"estimator", "p_freeze", "trial", "seed", "accuracy", "baseline_accuracy", "frozen",
                   "frozen_unchanged", "error"});
  for (const Estimator e : c.estimators) {
    TrainConfig cfg = base;
    cfg.estimator = e;
    if (!c.source.contains("eta")) cfg.eta = (e == Estimator::two_phase || e == Estimator::hinge_two_phase) ? 1.0 : 0.3;
    const SweepReport rep = freeze_sweep(factory, sel, d.train, d.eval, cfg, c.p_list, c.trials, c.threads);
    for (const auto& s : rep.summary)
      summary.add({to_string(e), fmt(s.p_freeze), fmt(s.mean_accuracy), fmt(s.std_accuracy), fmt(s.trials)});
    for (const auto& tr : rep.trials) {
      std::string err = tr.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      trials.add({to_string(e), fmt(tr.p_freeze), fmt(tr.trial), std::to_string(tr.seed), fmt(tr.accuracy),
                  fmt(tr.baseline_accuracy), fmt(tr.frozen), tr.frozen_unchanged ? "1" : "0", err});
    }
  }
  out.csv("sweep.csv", summary);
  out.csv("trials.csv", trials);
  std::cout << summary.str();
  return kOk;
}

int cmd_bias_exp(const RunConfig& c, OutputDir& out) {
  const Topology t = build_topology(c);
  RunConfig rc = c;
  if (rc.data.kind != DataSpec::Kind::regression) fail(Errc::config_error, "bias-exp uses synthetic regression data");
  rc.data.sigma = 0.0;
  const Data d = build_data(rc);
  const Selectors sel = build_selectors(c, *t.graph);
  check_selector_counts(sel, d);
  const Circuit circuit = Circuit::homogeneous(*t.graph, c.train.r0, c.train.bounds);
  const NoiseModel noise = NoiseModel::isotropic(sel.num_outputs(), c.noise_sigma, c.samples);
  const BiasExperiment b = bias_experiment(circuit, sel, d.train.inputs[0], d.train.targets[0], c.train.gamma,
                                           c.train.beta, noise, derive_seed(c.seed, 99));
  const Eigen::VectorXd limit = two_phase_limit(circuit, sel, d.train.inputs[0], d.train.targets[0], c.train.gamma).g;

  CsvTable bias({"edge_index", "two_phase_clean", "two_phase_mean", "two_phase_se", "predicted_shift", "observed_shift",
                 "z_two_phase", "analytical_clean", "analytical_mean", "analytical_se", "z_analytical"});
  CsvTable grads({"edge_index", "g_analytical", "g_two_phase", "g_limit", "beta"});
  std::size_t tp_ok = 0, an_ok = 0;
  for (Eigen::Index e = 0; e < b.predicted.size(); ++e) {
    const double shift = b.two_phase_mean(e) - b.two_phase_clean(e);
    const double z_tp = b.two_phase_se(e) > 0 ? (shift - b.predicted(e)) / b.two_phase_se(e) : 0.0;
    const double z_an = b.analytical_se(e) > 0 ? (b.analytical_mean(e) - b.analytical_clean(e)) / b.analytical_se(e) : 0.0;
    tp_ok += std::abs(z_tp) <= 3.0;
    an_ok += std::abs(z_an) <= 3.0;
    const auto ei = static_cast<std::size_t>(e);
    bias.add({fmt(ei), fmt(b.two_phase_clean(e)), fmt(b.two_phase_mean(e)), fmt(b.two_phase_se(e)), fmt(b.predicted(e)),
              fmt(shift), fmt(z_tp), fmt(b.analytical_clean(e)), fmt(b.analytical_mean(e)), fmt(b.analytical_se(e)),
              fmt(z_an)});
    grads.add({fmt(ei), fmt(b.analytical_clean(e)), fmt(b.two_phase_clean(e)), fmt(limit(e)), fmt(c.train.beta)});
  }
  out.csv("bias.csv", bias);
  out.csv("gradients.csv", grads);
  std::cout << "edges within 3 SE: two-phase shift vs prediction " << tp_ok << "/" << b.predicted.size()
            << ", analytical mean vs clean " << an_ok << "/" << b.predicted.size() << "\n";
  return kOk;
}

int cmd_gep_verify(const RunConfig& c, OutputDir& out) {
  CsvTable sweep({"beta", "estimate", "oracle", "abs_error"});
  CsvTable checks({"check", "value", "tolerance", "pass"});
  bool ok = true;
  auto check = [&](const std::string& name, double value, double tol) {
    const bool pass = std::abs(value) <= tol;
    ok = ok && pass;
    checks.add({name, fmt(value), fmt(tol), pass ? "1" : "0"});
  };

  // Scalar quadratic, theta = 2, target 0.
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const EnergySystem ep = quadratic_ep_system(one, one, Eigen::VectorXd::Zero(1));
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 2.0);
  const double oracle = objective_gradient_oracle(ep, theta, 1e-4)(0);
  std::vector<double> lb, le;
  for (const double beta : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
    const double est = gep_estimate(ep, theta, beta).estimate(0);
    sweep.add({fmt(beta), fmt(est), fmt(oracle), fmt(std::abs(est - oracle))});
    lb.push_back(std::log(beta));
    le.push_back(std::log(std::abs(est - oracle)));
  }
  check("oracle_minus_closed_form", oracle - 2.0, 1e-6);
  check("error_rate_slope_minus_1", fit_line(lb, le).first - 1.0, 0.1);

  // Nudge orders on a random 4-d quadratic.
  Rng rng(c.seed);
  Eigen::MatrixXd B(4, 4);
  for (Eigen::Index i = 0; i < 16; ++i) B.data()[i] = rng.normal();
  const Eigen::MatrixXd H = B * B.transpose() + 4.0 * Eigen::MatrixXd::Identity(4, 4);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2, 4);
  P(0, 1) = P(1, 3) = 1.0;
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(2, 1.5);
  Eigen::VectorXd th(4);
  for (Eigen::Index i = 0; i < 4; ++i) th(i) = rng.normal();
  const std::vector<double> betas{1e-4, 1e-3, 1e-2, 1e-1};
  check("ep_order_minus_1", nudge_order_fit(quadratic_ep_system(H, P, target), th, betas).slope - 1.0, 0.05);
  check("cl_order_minus_2", nudge_order_fit(quadratic_cl_system(H, P, target), th, betas).slope - 2.0, 0.05);

  // Mobility independence of the nudged equilibrium.
  Eigen::MatrixXd G(4, 4);
  for (Eigen::Index i = 0; i < 16; ++i) G.data()[i] = rng.normal();
  G = G * G.transpose() + Eigen::MatrixXd::Identity(4, 4);
  const Equilibrium a = relax(quadratic_ep_system(H, P, target), th, 0.1, Eigen::VectorXd::Zero(4));
  const Equilibrium b = relax(quadratic_ep_system(H, P, target, 1, G), th, 0.1, Eigen::VectorXd::Zero(4));
  check("mobility_shift", (a.y - b.y).norm(), 1e-8);

  out.csv("gep.csv", sweep);
  out.csv("checks.csv", checks);
  std::cout << checks.str();
  return ok ? kOk : kVerifyFailed;
}

int cmd_verify(const RunConfig& c, OutputDir& out) {
  const auto rows = verify_invariants({c.graphs, c.max_nodes, c.seed});
  CsvTable t({"invariant", "max_residual", "tolerance", "checks", "pass"});
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.pass();
    t.add({r.name, fmt(r.max_residual), fmt(r.tolerance), fmt(r.checks), r.pass() ? "1" : "0"});
  }
  out.csv("verify.csv", t);
  std::cout << t.str();
  return ok ? kOk : kVerifyFailed;
}

int cmd_landscape(const RunConfig& c, OutputDir& out) {
  const Topology t = build_topology(c);
  const Data d = build_data(c);
  const Selectors sel = build_selectors(c, *t.graph);
  check_selector_counts(sel, d);
  const CircuitGraph g = *t.graph;
  Circuit circuit = Circuit::homogeneous(g, c.train.r0, c.train.bounds);
  const Trajectory traj = train(circuit, sel, d.train, c.train);
  const CircuitFactory factory = [&] { return Circuit::homogeneous(g, c.train.r0, c.train.bounds); };
  const Landscape land = landscape_sample(traj, factory, sel, d.train, c.train.gamma, c.range, c.resolution);
  CsvTable grid({"q1", "q2", "loss"});
  for (const auto& p : land.grid) grid.add({fmt(p.q1), fmt(p.q2), fmt(p.loss)});
  CsvTable path({"step", "q1", "q2"});
  for (const auto& p : land.path) path.add({fmt(p.step), fmt(p.q1), fmt(p.q2)});
  out.csv("landscape.csv", grid);
  out.csv("trajectory.csv", path);
  out.csv("run.csv", run_table(traj));
  return kOk;
}

int dispatch(const RunConfig& c, OutputDir& out) {
  if (c.command == "gen") return cmd_gen(c, out);
  if (c.command == "train") return cmd_train(c, out);
  if (c.command == "freeze-sweep") return cmd_freeze_sweep(c, out);
  if (c.command == "bias-exp") return cmd_bias_exp(c, out);
  if (c.command == "gep-verify") return cmd_gep_verify(c, out);
  if (c.command == "verify") return cmd_verify(c, out);
  return cmd_landscape(c, out);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resistor-network learning toolkit: projector gradients, two-phase estimates, GEP checks."};
  app.footer(kExitHelp);
  app.require_subcommand(0, 1);  // the command may come from the config file instead

  std::string config_path, out_dir, grid, nanowire, graph_file, estimator, data_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, steps;
  std::optional<double> eta, beta, gamma, p_freeze, sigma;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--threads", threads, "Worker threads (default: OHMGRAD_THREADS, else 1)");
  app.add_option("--grid", grid, "Grid topology ROWSxCOLS");
  app.add_option("--nanowire", nanowire, "Nanowire topology n=N,l=L,seed=S");
  app.add_option("--graph-file", graph_file, "Graph JSON file");
  app.add_option("--estimator", estimator, "analytical | two-phase | two-phase-limit | hinge-analytical | hinge-two-phase");
  app.add_option("--eta", eta, "Learning rate");
  app.add_option("--beta", beta, "Nudge strength");
  app.add_option("--gamma", gamma, "Input gain");
  app.add_option("--steps", steps, "Training steps");
  app.add_option("--p-freeze", p_freeze, "Freeze probability");
  app.add_option("--wdbc", data_path, "WDBC data file (switches to classification)");
  app.add_option("--sigma", sigma, "Target noise sigma (regression data)");

  const std::map<std::string, std::string> about{
      {"gen", "Build a topology and its selectors; writes network.json"},
      {"train", "Train one circuit; writes run.csv, steps.csv, circuit.json, summary.json"},
      {"freeze-sweep", "Accuracy against freeze probability; writes sweep.csv, trials.csv"},
      {"bias-exp", "Monte-Carlo noise bias of the two-phase estimator; writes bias.csv, gradients.csv"},
      {"gep-verify", "Generalized two-phase checks on reference energies; writes gep.csv, checks.csv"},
      {"verify", "Projector and gradient invariants on random graphs; writes verify.csv"},
      {"landscape", "Loss surface along the trajectory's principal directions"},
  };
  for (const auto& name : commands()) app.add_subcommand(name, about.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  std::string command = app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name();
  std::optional<OutputDir> out;
  try {
    json j = config_path.empty() ? json::object() : read_json_file(config_path);
    if (!j.is_object()) fail(Errc::schema_error, config_path + ": configuration must be a JSON object");
    if (command.empty()) {
      if (!j.contains("command") || !j["command"].is_string())
        fail(Errc::config_error, "no command given: name a subcommand or set 'command' in --config");
      command = j["command"].get<std::string>();
    } else if (j.contains("command") && j["command"] != command) {
      fail(Errc::config_error, "config file is for command " + j["command"].dump() + ", invoked as '" + command + "'");
    }
    j["command"] = command;
    auto set_topology = [&](const char* key, json value) {
      for (const char* k : {"grid", "nanowire", "graph_file"}) j.erase(k);
      j[key] = std::move(value);
    };
    int topo_flags = !grid.empty() + !nanowire.empty() + !graph_file.empty();
    if (topo_flags > 1) fail(Errc::config_error, "conflicting topology flags: give one of --grid, --nanowire, --graph-file");
    if (!grid.empty()) set_topology("grid", parse_grid(grid));
    if (!nanowire.empty()) set_topology("nanowire", parse_kv_list(nanowire));
    if (!graph_file.empty()) set_topology("graph_file", graph_file);
    if (!out_dir.empty()) j["out"] = out_dir;
    if (seed) j["seed"] = *seed;
    if (threads) j["threads"] = *threads;
    if (!estimator.empty()) j["estimator"] = estimator;
    if (eta) j["eta"] = *eta;
    if (beta) j["beta"] = *beta;
    if (gamma) j["gamma"] = *gamma;
    if (steps) j["steps"] = *steps;
    if (p_freeze) j["p_freeze"] = *p_freeze;
    if (!data_path.empty()) {
      j["data"]["kind"] = "wdbc";
      j["data"]["path"] = data_path;
    }
    if (sigma) j["data"]["sigma"] = *sigma;

    const RunConfig cfg = parse_config(j);
    if (cfg.data.kind == DataSpec::Kind::wdbc && !fs::exists(cfg.data.path))
      fail(Errc::io_error, "data file not found: " + cfg.data.path);
    if (cfg.topology.kind == TopologySpec::Kind::file && !fs::exists(cfg.topology.path))
      fail(Errc::io_error, "graph file not found: " + cfg.topology.path);

    out.emplace(cfg.out);
    const int rc = dispatch(cfg, *out);
    json meta = {{"command", command},
                 {"version", kVersion},
                 {"timestamp", utc_now()},
                 {"status", rc},
                 {"config", cfg.source},
                 {"files", out->names()}};
    out->json_file("meta.json", meta);
    if (rc != kOk) std::cerr << "error: verification checks failed (see CSV output)\n";
    return rc;
  } catch (const Error& e) {
    if (out) out->rollback();
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    if (out) out->rollback();
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
