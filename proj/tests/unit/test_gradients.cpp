#include "helpers.hpp"
#include "ohmgrad/experiments.hpp"
#include "ohmgrad/gradients.hpp"
#include "ohmgrad/topology.hpp"
#include "ohmgrad/verify.hpp"

#include <vector>

using namespace ohmgrad;
using testing::code_of;
using testing::vec;

namespace {

struct Triangle {
  Circuit c{testing::triangle(), vec({1, 1, 1})};
  Selectors sel{3, {0}, {2}};
  Eigen::VectorXd x = vec({1});
  Eigen::VectorXd y = vec({0});
};

double hinge_loss(const Circuit& c, const Selectors& sel, const Eigen::VectorXd& x, int label) {
  const double yhat = sel.read_output(solve_voltage_mode(c, sel.embed_input(x)).v)(0);
  return std::max(0.0, 1.0 - label * yhat);
}

}  // namespace

TEST_CASE("triangle: exact values of every estimator") {
  const Triangle t;
  const GradientEstimate a = analytical_gradient_ls(t.c, t.sel, t.x, t.y);
  CHECK(testing::max_abs(a.g - vec({-1, -1, 2}) / 27.0) < 1e-15);
  CHECK(a.prediction(0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(a.loss == doctest::Approx(1.0 / 18.0).epsilon(1e-15));

  const GradientEstimate lim = two_phase_limit(t.c, t.sel, t.x, t.y);
  CHECK(testing::max_abs(lim.g - Eigen::Vector3d::Constant(-1.0 / 27.0)) < 1e-15);
  CHECK(testing::max_abs(two_phase_limit_projector_form(t.c, t.sel, t.x, t.y) - lim.g) < 1e-15);

  // The limit is not the gradient: it misses the -Omega^T term on the output edge.
  CHECK((a.g - lim.g).norm() > 0.05);

  const GradientEstimate h = hinge_subgradient(t.c, t.sel, t.x, -1);
  CHECK(h.loss == doctest::Approx(2.0 / 3.0));
  CHECK(testing::max_abs(h.g - vec({1, 1, -2}) / 9.0) < 1e-15);
  const GradientEstimate hp = hinge_subgradient(t.c, t.sel, t.x, +1);
  CHECK(hp.loss == doctest::Approx(4.0 / 3.0));
  CHECK(testing::max_abs(hp.g + h.g) < 1e-15);
}

TEST_CASE("two-phase estimate at small beta approaches the limit linearly") {
  const Triangle t;
  const Eigen::VectorXd lim = two_phase_limit(t.c, t.sel, t.x, t.y).g;
  // i_C = i_F + beta Q (yhat - y) exactly, so the gap is (beta/2) (Q (yhat - y))^2 = beta/162 per edge.
  for (const double beta : {1e-1, 1e-2, 1e-3}) {
    const GradientEstimate tp = two_phase_gradient(t.c, t.sel, t.x, t.y, 1.0, beta);
    CHECK(testing::max_abs(tp.g - lim - Eigen::Vector3d::Constant(beta / 162.0)) < 1e-12);
  }

  Rng rng(17);
  const CircuitGraph g = grid_graph(3, 3);
  const Circuit c(g, testing::log_uniform(rng, 12));
  const Selectors sel(12, {2, 3}, {4, 5});
  const Eigen::VectorXd x = testing::normals(rng, 2), y = testing::normals(rng, 2);
  const Eigen::VectorXd l = two_phase_limit(c, sel, x, y).g;
  std::vector<double> lb, le;
  for (const double beta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    lb.push_back(std::log(beta));
    le.push_back(std::log((two_phase_gradient(c, sel, x, y, 1.0, beta).g - l).norm()));
  }
  double slope = 0;
  for (std::size_t k = 1; k < lb.size(); ++k) slope += (le[k] - le[k - 1]) / (lb[k] - lb[k - 1]);
  CHECK(slope / 3.0 == doctest::Approx(1.0).epsilon(0.05));

  CHECK(code_of([&] { two_phase_gradient(c, sel, x, y, 1.0, 0.0); }) == Errc::zero_nudge);
  CHECK(code_of([&] { hinge_two_phase(t.c, t.sel, t.x, 1, 1.0, 0.0); }) == Errc::zero_nudge);
}

TEST_CASE("analytical gradients match finite differences on random grids") {
  Rng rng(23);
  const CircuitGraph g = grid_graph(3, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const Circuit c(g, testing::log_uniform(rng, 12));
    const Selectors sel = choose_io_edges(g, 1, 1, static_cast<std::uint64_t>(trial));
    const Eigen::VectorXd x = testing::normals(rng, 1), y = testing::normals(rng, 1);
    const double gamma = 1.0 + rng.uniform();
    const Eigen::VectorXd ga = analytical_gradient_ls(c, sel, x, y, gamma).g;
    const Eigen::VectorXd fd =
        finite_difference_gradient(c, [&](const Circuit& cc) { return ls_loss(cc, sel, x, y, gamma); });
    CHECK((ga - fd).norm() <= 1e-5 * std::max(1e-8, fd.norm()));
  }

  // Several outputs on a larger grid.
  const CircuitGraph g5 = grid_graph(5, 5);
  const Circuit c(g5, testing::log_uniform(rng, static_cast<Eigen::Index>(g5.num_edges())));
  const Selectors sel = choose_io_edges(g5, 2, 2, 3);
  const Eigen::VectorXd x = testing::normals(rng, 2), y = testing::normals(rng, 2);
  const Eigen::VectorXd ga = analytical_gradient_ls(c, sel, x, y).g;
  const Eigen::VectorXd fd = finite_difference_gradient(c, [&](const Circuit& cc) { return ls_loss(cc, sel, x, y, 1.0); });
  CHECK((ga - fd).norm() <= 1e-5 * fd.norm());
}

TEST_CASE("hinge subgradient matches finite differences away from the kink") {
  Rng rng(31);
  const CircuitGraph g = grid_graph(3, 3);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Circuit c(g, testing::log_uniform(rng, 12));
    const Selectors sel(12, {2}, {4});
    const Eigen::VectorXd x = 3.0 * testing::normals(rng, 1);
    const int label = rng.uniform() < 0.5 ? -1 : 1;
    const GradientEstimate h = hinge_subgradient(c, sel, x, label);
    if (std::abs(1.0 - label * h.prediction(0)) < 1e-3) continue;
    const Eigen::VectorXd fd = finite_difference_gradient(c, [&](const Circuit& cc) { return hinge_loss(cc, sel, x, label); });
    CHECK((h.g - fd).norm() <= 1e-5 * std::max(1e-6, fd.norm()));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("hinge two-phase") {
  const Triangle t;
  // Margin violated: nudge +beta on the output edge, limit i_F .* M e_o = (1/9)(1,1,1).
  const GradientEstimate h = hinge_two_phase(t.c, t.sel, t.x, -1, 1.0, 1e-3);
  CHECK(testing::max_abs(h.g - Eigen::Vector3d::Constant(1.0 / 9.0 + 0.5e-3 / 9.0)) < 1e-12);

  // Satisfied margin gives zero for both hinge estimators.
  const Eigen::VectorXd big = vec({-6});  // yhat = 2
  CHECK(hinge_two_phase(t.c, t.sel, big, 1, 1.0, 0.5).g == Eigen::Vector3d::Zero());
  CHECK(hinge_subgradient(t.c, t.sel, big, 1).g == Eigen::Vector3d::Zero());

  const Selectors two(3, {0}, {1, 2});
  CHECK(code_of([&] { hinge_subgradient(t.c, two, t.x, 1); }) == Errc::wrong_output_count);
  CHECK(code_of([&] { hinge_subgradient(t.c, t.sel, t.x, 0); }) == Errc::invalid_argument);
}

TEST_CASE("masking") {
  const Triangle t;
  const GradientEstimate a = analytical_gradient_ls(t.c, t.sel, t.x, t.y);
  const std::vector<std::uint8_t> m{1, 0, 1};
  const GradientEstimate masked = mask_gradient(a, m);
  CHECK(masked.g(1) == 0.0);
  CHECK(masked.g(0) == a.g(0));
  CHECK(masked.g(2) == a.g(2));
  const std::vector<std::uint8_t> none{0, 0, 0};
  CHECK(mask_gradient(a, none).g == Eigen::Vector3d::Zero());
  const std::vector<std::uint8_t> all{1, 1, 1};
  CHECK(mask_gradient(a, all).g == a.g);
  const std::vector<std::uint8_t> bad{1, 2, 1};
  CHECK(code_of([&] { mask_gradient(a, bad); }) == Errc::invalid_argument);
  const std::vector<std::uint8_t> shortm{1, 1};
  CHECK(code_of([&] { mask_gradient(a, shortm); }) == Errc::dimension_mismatch);
}

TEST_CASE("bias prediction") {
  const Triangle t;
  CHECK(bias_prediction(t.c, t.sel, 0.0, NoiseModel::isotropic(1, 3.0)) == Eigen::Vector3d::Zero());
  // Q = M P_o = -(1/3)(1,1,1)^T, so diag(Q Sigma Q^T) = sigma^2 / 9 per edge.
  const double beta = 0.5, sigma = 3.0;
  CHECK(testing::max_abs(bias_prediction(t.c, t.sel, beta, NoiseModel::isotropic(1, sigma)) -
                         Eigen::Vector3d::Constant(beta / 2.0 * sigma * sigma / 9.0)) < 1e-14);

  NoiseModel bad;
  bad.covariance = -Eigen::MatrixXd::Identity(1, 1);
  CHECK(code_of([&] { bias_prediction(t.c, t.sel, beta, bad); }) == Errc::not_psd);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  bad.covariance = asym;
  CHECK(code_of([&] { bias_prediction(t.c, Selectors(3, {0}, {1, 2}), beta, bad); }) == Errc::not_psd);
}

TEST_CASE("Monte-Carlo bias: two-phase shifts by the prediction, analytical stays put") {
  Rng rng(41);
  const CircuitGraph g = grid_graph(3, 3);
  const Circuit c(g, testing::log_uniform(rng, 12));
  const Selectors sel(12, {2, 3}, {4, 5});
  const Eigen::VectorXd x = testing::normals(rng, 2), y = testing::normals(rng, 2);
  const BiasExperiment b = bias_experiment(c, sel, x, y, 1.0, 0.5, NoiseModel::isotropic(2, 3.0, 20000), 7);
  for (Eigen::Index e = 0; e < 12; ++e) {
    CHECK(std::abs(b.two_phase_shift()(e) - b.predicted(e)) <= 4.0 * b.two_phase_se(e) + 1e-12);
    CHECK(std::abs(b.analytical_shift()(e)) <= 4.0 * b.analytical_se(e) + 1e-12);
  }
  CHECK(b.predicted.minCoeff() >= 0.0);
  CHECK(b.predicted.maxCoeff() > 0.0);
}

TEST_CASE("input validation") {
  const Triangle t;
  CHECK(code_of([&] { analytical_gradient_ls(t.c, t.sel, t.x, vec({0, 0})); }) == Errc::dimension_mismatch);
  CHECK(code_of([&] { analytical_gradient_ls(t.c, t.sel, vec({NAN}), t.y); }) == Errc::non_finite);
  CHECK(code_of([&] { analytical_gradient_ls(t.c, Selectors(4, {0}, {2}), t.x, t.y); }) == Errc::selector_mismatch);
  CHECK(least_squares_loss(vec({1, 2}), vec({0, 0})) == doctest::Approx(2.5));
  CHECK(std::string(to_string(Estimator::hinge_two_phase)) == "hinge-two-phase");
}
