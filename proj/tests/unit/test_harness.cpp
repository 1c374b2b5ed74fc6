#include "helpers.hpp"
#include "ohmgrad/datasets.hpp"
#include "ohmgrad/experiments.hpp"
#include "ohmgrad/io.hpp"
#include "ohmgrad/topology.hpp"
#include "ohmgrad/training.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ohmgrad;
using testing::code_of;
using testing::vec;

namespace {

const std::string kWdbc = std::string(OHMGRAD_TEST_DATA) + "/wdbc.data";

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("ohmgrad_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::vector<std::string> wdbc_lines() {
  std::ifstream in(kWdbc);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

Dataset single_example() {
  Dataset d;
  d.inputs = {vec({1})};
  d.targets = {vec({0})};
  return d;
}

// Two-class toy data on a 3x3 grid with one output edge.
struct Toy {
  CircuitGraph g = grid_graph(3, 3);
  Selectors sel{12, {2, 3}, {4}};
  Dataset data;
  Toy() {
    data.kind = TaskKind::classification;
    Rng rng(77);
    for (int k = 0; k < 40; ++k) {
      const int label = k % 2 ? 1 : -1;
      data.inputs.push_back(vec({label * 2.0 + 0.3 * rng.normal(), -label * 1.0 + 0.3 * rng.normal()}));
      data.labels.push_back(label);
    }
  }
  Circuit circuit() const { return Circuit::homogeneous(g); }
};

}  // namespace

TEST_CASE("regression data") {
  const Dataset d0 = gen_regression(2, 3, 0.0, 50, 4);
  CHECK(d0.size() == 50);
  CHECK(d0.input_dim() == 2);
  CHECK(d0.output_dim() == 3);
  CHECK(d0.true_map.rows() == 3);
  CHECK(d0.true_map.minCoeff() >= 0.0);
  CHECK(d0.true_map.maxCoeff() < 10.0);
  for (std::size_t k = 0; k < d0.size(); ++k) CHECK((d0.targets[k] - d0.true_map * d0.inputs[k]).norm() == 0.0);

  const Dataset d3 = gen_regression(2, 3, 3.0, 4000, 4);
  CHECK(d3.true_map == gen_regression(2, 3, 0.0, 1, 4).true_map);
  double ss = 0.0;
  for (std::size_t k = 0; k < d3.size(); ++k) ss += (d3.targets[k] - d3.true_map * d3.inputs[k]).squaredNorm();
  // Residual variance 9 per entry; 12000 draws put the estimate within a few percent.
  CHECK(ss / 12000.0 == doctest::Approx(9.0).epsilon(0.06));

  const Dataset again = gen_regression(2, 3, 3.0, 4000, 4);
  for (std::size_t k = 0; k < d3.size(); ++k) CHECK(again.targets[k] == d3.targets[k]);
  CHECK(code_of([] { gen_regression(2, 2, -1.0, 5, 0); }) == Errc::invalid_argument);
  CHECK(code_of([] { gen_regression(2, 2, 1.0, 0, 0); }) == Errc::invalid_argument);
}

TEST_CASE("wdbc loading") {
  const Dataset d = load_wdbc(kWdbc);
  CHECK(d.size() == 569);
  CHECK(d.input_dim() == 30);
  CHECK(d.kind == TaskKind::classification);
  CHECK(d.labels[0] == 1);
  CHECK(d.inputs[0](0) == 17.99);
  CHECK(std::count(d.labels.begin(), d.labels.end(), 1) == 212);

  auto lines = wdbc_lines();
  std::ostringstream truncated;
  for (std::size_t k = 0; k < 5; ++k) {
    std::string l = lines[k];
    if (k == 3) l = l.substr(0, l.rfind(','));
    truncated << l << "\n";
  }
  const std::string tpath = temp_file("truncated.data", truncated.str());
  try {
    load_wdbc(tpath);
    FAIL("truncated file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(std::string(e.what()).find("truncated.data:4:") != std::string::npos);
  }
  CHECK(code_of([] { load_wdbc(temp_file("schema.data", "1,2,3\n4,5,6\n")); }) == Errc::schema_error);
  std::string bad = lines[0];
  bad.replace(bad.find(",M,"), 3, ",X,");
  CHECK(code_of([&] { load_wdbc(temp_file("diag.data", bad + "\n")); }) == Errc::parse_error);
  CHECK(code_of([] { load_wdbc("/nonexistent/wdbc.data"); }) == Errc::io_error);
}

TEST_CASE("pca") {
  // Points on a line in 3-d.
  Eigen::MatrixXd line(20, 3);
  for (int k = 0; k < 20; ++k) line.row(k) << k, 2.0 * k + 1.0, -0.5 * k;
  const PcaResult r1 = pca_reduce(line, 1);
  CHECK(r1.model.explained_ratio(0) >= 1.0 - 1e-9);

  Rng rng(6);
  Eigen::MatrixXd X(30, 4);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 4; ++j) X(i, j) = rng.normal() * (j + 1) + j;
  const PcaResult full = pca_reduce(X, 4);
  const Eigen::MatrixXd Z = full.model.standardize(X);
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      CHECK(std::abs((Z.row(i) - Z.row(j)).norm() - (full.projected.row(i) - full.projected.row(j)).norm()) <= 1e-9);
  for (Eigen::Index c = 0; c < 4; ++c) {
    Eigen::Index arg = 0;
    full.model.basis.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(full.model.basis(arg, c) > 0.0);
  }
  for (Eigen::Index c = 1; c < 4; ++c) CHECK(full.model.explained_variance(c) <= full.model.explained_variance(c - 1));

  Eigen::MatrixXd withconst = X;
  withconst.col(2).setConstant(5.0);
  const PcaResult dropped = pca_reduce(withconst, 2);
  CHECK(dropped.model.kept_columns == std::vector<std::size_t>({0, 1, 3}));
  CHECK(dropped.model.warnings.size() == 1);

  const PcaResult w = pca_reduce(load_wdbc(kWdbc).input_matrix(), 3);
  CHECK(w.projected.cols() == 3);
  CHECK(w.projected.rows() == 569);
  CHECK(code_of([&] { pca_reduce(X, 5); }) == Errc::invalid_argument);
}

TEST_CASE("stratified split") {
  std::vector<int> labels;
  for (int k = 0; k < 100; ++k) labels.push_back(k < 30 ? 1 : -1);
  const Split s = stratified_split(labels, 0.8, 3);
  CHECK(s.train.size() == 80);
  CHECK(s.test.size() == 20);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  int pos = 0;
  for (const std::size_t k : s.train) pos += labels[k] == 1;
  CHECK(pos == 24);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t k = 0; k < 100; ++k) CHECK(all[k] == k);
  CHECK(stratified_split(labels, 0.8, 3).test == s.test);
  CHECK(code_of([&] { stratified_split(labels, 1.0, 3); }) == Errc::invalid_argument);
}

TEST_CASE("training basics") {
  Circuit c = Circuit::homogeneous(testing::triangle());
  const Selectors sel(3, {0}, {2});
  const Dataset d = single_example();

  TrainConfig frozen;
  frozen.eta = 0.0;
  frozen.steps = 20;
  const Trajectory t0 = train(c, sel, d, frozen);
  CHECK(t0.final_r == t0.initial_r);
  CHECK(t0.records.size() == 1);

  TrainConfig cfg;
  cfg.eta = 0.05;
  cfg.steps = 51;
  const Trajectory t = train(c, sel, d, cfg);
  for (std::size_t k = 1; k < 51; ++k) CHECK(t.step_loss[k] < t.step_loss[k - 1]);

  TrainConfig big;
  big.eta = 50.0;
  big.steps = 200;
  big.record_every = 10;
  const Trajectory tb = train(c, sel, d, big);
  CHECK(tb.records.size() == 20);
  for (const auto& rec : tb.records) {
    CHECK(rec.r.minCoeff() >= big.bounds.min);
    CHECK(rec.r.maxCoeff() <= big.bounds.max);
  }
  CHECK(c.resistances() == tb.final_r);

  big.record_every = 30;
  CHECK(train(c, sel, d, big).records.size() == 7);

  TrainConfig huge;
  huge.gamma = 1e300;
  huge.steps = 5;
  CHECK(code_of([&] { train(c, sel, d, huge); }) == Errc::divergence);
}

TEST_CASE("training is deterministic and respects the mask") {
  const Toy toy;
  TrainConfig cfg;
  cfg.estimator = Estimator::hinge;
  cfg.eta = 1.0;
  cfg.steps = 200;
  cfg.record_every = 50;
  cfg.p_freeze = 0.5;
  cfg.seed = 12;
  Circuit a = toy.circuit(), b = toy.circuit();
  const Trajectory ta = train(a, toy.sel, toy.data, cfg), tb = train(b, toy.sel, toy.data, cfg);
  CHECK(ta.final_r == tb.final_r);
  CHECK(ta.step_loss == tb.step_loss);
  REQUIRE(ta.records.size() == tb.records.size());
  for (std::size_t k = 0; k < ta.records.size(); ++k) CHECK(ta.records[k].r == tb.records[k].r);

  CHECK(ta.mask == draw_mask(12, 0.5, 12));
  std::size_t frozen = 0;
  for (std::size_t e = 0; e < 12; ++e)
    if (!ta.mask[e]) {
      ++frozen;
      CHECK(ta.final_r(static_cast<Eigen::Index>(e)) == ta.initial_r(static_cast<Eigen::Index>(e)));
    }
  CHECK(frozen > 0);
  CHECK(frozen < 12);

  const std::vector<std::uint8_t> none = draw_mask(50, 1.0, 3), all = draw_mask(50, 0.0, 3);
  CHECK(std::count(none.begin(), none.end(), 1) == 0);
  CHECK(std::count(all.begin(), all.end(), 1) == 50);
}

TEST_CASE("training errors") {
  const Toy toy;
  Circuit c = toy.circuit();
  TrainConfig cfg;
  cfg.estimator = Estimator::hinge;
  CHECK(code_of([&] { train(c, Selectors(12, {2, 3}, {4, 5}), toy.data, cfg); }) == Errc::wrong_output_count);
  cfg.estimator = Estimator::analytical;
  CHECK(code_of([&] { train(c, toy.sel, toy.data, cfg); }) == Errc::invalid_argument);
  cfg.estimator = Estimator::two_phase;
  cfg.beta = 0.0;
  CHECK(code_of([&] { cfg.validate(); }) == Errc::config_error);
  cfg.beta = 0.3;
  cfg.p_freeze = 1.5;
  CHECK(code_of([&] { cfg.validate(); }) == Errc::config_error);
  cfg.p_freeze = 0.0;
  cfg.eta = -1.0;
  CHECK(code_of([&] { cfg.validate(); }) == Errc::config_error);
}

TEST_CASE("freeze sweep") {
  const Toy toy;
  TrainConfig cfg;
  cfg.estimator = Estimator::hinge;
  cfg.eta = 1.0;
  cfg.steps = 150;
  cfg.seed = 5;
  const SweepReport rep = freeze_sweep([&] { return toy.circuit(); }, toy.sel, toy.data, toy.data, cfg, {0.0, 1.0}, 3);
  REQUIRE(rep.trials.size() == 6);
  REQUIRE(rep.summary.size() == 2);
  for (const SweepTrial& tr : rep.trials) {
    CHECK(tr.error.empty());
    CHECK(tr.frozen_unchanged);
    if (tr.p_freeze == 1.0) {
      CHECK(tr.accuracy == tr.baseline_accuracy);
      CHECK(tr.frozen == 12);
    }
  }
  // p = 0 reproduces a plain training run with the trial seed.
  TrainConfig plain = cfg;
  plain.seed = derive_seed(cfg.seed, 1);
  Circuit c = toy.circuit();
  train(c, toy.sel, toy.data, plain);
  CHECK(rep.trials[1].accuracy == classification_accuracy(c, toy.sel, toy.data, cfg.gamma));

  const SweepReport threaded =
      freeze_sweep([&] { return toy.circuit(); }, toy.sel, toy.data, toy.data, cfg, {0.0, 1.0}, 3, 3);
  for (std::size_t k = 0; k < 6; ++k) CHECK(threaded.trials[k].accuracy == rep.trials[k].accuracy);
  CHECK(rep.summary[1].std_accuracy == 0.0);
  CHECK(code_of([&] { freeze_sweep([&] { return toy.circuit(); }, toy.sel, toy.data, toy.data, cfg, {0.0}, 0); }) ==
        Errc::invalid_argument);
}

TEST_CASE("landscape") {
  const Toy toy;
  const auto factory = [&] { return toy.circuit(); };
  TrainConfig cfg;
  cfg.estimator = Estimator::hinge;
  cfg.eta = 1.0;
  cfg.steps = 100;
  cfg.record_every = 10;
  Circuit c = toy.circuit();
  const Trajectory traj = train(c, toy.sel, toy.data, cfg);
  const Landscape ls = landscape_sample(traj, factory, toy.sel, toy.data, 1.0, 1.5, 5);
  CHECK(ls.grid.size() == 25);
  CHECK(ls.grid[12].q1 == 0.0);
  CHECK(ls.grid[12].q2 == 0.0);
  Circuit c0 = toy.circuit();
  CHECK(ls.grid[12].loss == full_batch_loss(c0, toy.sel, toy.data, 1.0));
  CHECK(ls.grid.front().q1 == -1.5);
  CHECK(ls.grid.back().q2 == 1.5);
  CHECK(ls.path.size() == traj.records.size() + 1);
  CHECK(std::abs(ls.delta1.norm() - 1.0) < 1e-12);
  CHECK(std::abs(ls.delta1.dot(ls.delta2)) < 1e-12);

  // Snapshots moving along edge 7 only.
  Trajectory axis;
  axis.initial_r = Eigen::VectorXd::Ones(12);
  for (int k = 1; k <= 4; ++k) {
    TrainRecord rec;
    rec.step = static_cast<std::size_t>(k);
    rec.r = axis.initial_r;
    rec.r(7) += 0.1 * k;
    axis.records.push_back(rec);
  }
  const Landscape la = landscape_sample(axis, factory, toy.sel, toy.data, 1.0, 1.5, 3);
  CHECK(std::abs(la.delta1(7)) >= 1.0 - 1e-9);
  CHECK(la.grid.size() == 9);

  Trajectory still = axis;
  for (auto& rec : still.records) rec.r = still.initial_r;
  CHECK(code_of([&] { landscape_sample(still, factory, toy.sel, toy.data, 1.0); }) == Errc::degenerate_directions);
}

TEST_CASE("argmax readout and regression runs") {
  const Toy toy;
  const Selectors two(12, {2, 3}, {4, 5});
  const Circuit c = toy.circuit();
  const double acc = classification_accuracy(c, two, toy.data, 1.0, Readout::argmax);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(code_of([&] { classification_accuracy(c, two, toy.data, 1.0); }) == Errc::wrong_output_count);

  const CircuitGraph g = grid_graph(5, 5);
  const Selectors sel = choose_io_edges(g, 2, 2, 0);
  const Dataset d = gen_regression(2, 2, 0.0, 50, 1);
  Circuit rc = Circuit::homogeneous(g);
  TrainConfig cfg;
  cfg.steps = 50;
  const RegressionRun run = regression_run(rc, sel, d, cfg);
  CHECK(run.frobenius_error == doctest::Approx((io_map(rc, sel).W - d.true_map).norm()));
  CHECK(run.final_loss == doctest::Approx(full_batch_loss(rc, sel, d, 1.0)));

  std::vector<RegressionRun> runs(4);
  for (int k = 0; k < 4; ++k) runs[static_cast<std::size_t>(k)].screen_loss = 4.0 - k;
  CHECK(screen_runs(runs, 0.25) == std::vector<std::size_t>{3});
  CHECK(screen_runs(runs, 0.01).size() == 1);
}

TEST_CASE("csv output") {
  CsvTable t({"a", "b"});
  t.add({fmt(0.1), fmt(std::size_t{3})}).add({fmt(NAN), "x"});
  CHECK(t.str() == "a,b\n0.10000000000000001,3\n,x\n");
  const std::string path = temp_file("t.csv", t.str());
  CHECK(validate_csv(path, {"a", "b"}) == 2);
  CHECK(code_of([&] { validate_csv(path, {"a", "c"}); }) == Errc::schema_error);
  CHECK(code_of([&] { t.add({"1"}); }) == Errc::schema_error);

  const Circuit c(testing::triangle(), vec({1, 2, 3}));
  const Circuit back = circuit_from_json(circuit_to_json(c));
  CHECK(back.resistances() == c.resistances());
  CHECK(back.graph() == c.graph());
}
