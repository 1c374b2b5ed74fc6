#include "ohmgrad/gep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

#include "ohmgrad/error.hpp"

namespace ohmgrad {

using Vec = Eigen::VectorXd;

double EnergySystem::free_energy(double beta, const Vec& theta, const Vec& y) const {
  const double e = energy(theta, y);
  return beta == 0.0 ? e : e + nudge(beta, theta, y);
}

Vec EnergySystem::free_energy_grad(double beta, const Vec& theta, const Vec& y) const {
  Vec g = energy_grad(theta, y);
  if (beta != 0.0) g += nudge_grad(beta, theta, y);
  return g;
}

Vec EnergySystem::free_energy_param_grad(double beta, const Vec& theta, const Vec& y) const {
  Vec g = energy_param_grad(theta, y);
  if (beta != 0.0) g += nudge_param_grad(beta, theta, y);
  return g;
}

Eigen::MatrixXd EnergySystem::mobility_matrix() const {
  if (mobility.size() == 0)
    return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(state_dim),
                                     static_cast<Eigen::Index>(state_dim));
  return mobility;
}

Vec EnergySystem::start_state() const {
  if (initial_state.size() == 0) return Vec::Zero(static_cast<Eigen::Index>(state_dim));
  return initial_state;
}

void EnergySystem::validate(const Vec& theta, const Vec& y, double beta_probe) const {
  const auto n = static_cast<Eigen::Index>(state_dim);
  if (!energy || !energy_grad || !energy_param_grad || !nudge || !nudge_grad || !nudge_param_grad ||
      !objective)
    fail(Errc::invalid_argument, "energy system is missing an evaluator");
  if (order < 1) fail(Errc::invalid_argument, "nudge order must be >= 1");
  if (y.size() != n || theta.size() != static_cast<Eigen::Index>(param_dim))
    fail(Errc::dimension_mismatch, "state or parameter dimension mismatch");

  const Eigen::MatrixXd G = mobility_matrix();
  if (G.rows() != n || G.cols() != n) fail(Errc::dimension_mismatch, "mobility must be n x n");
  if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff()))
    fail(Errc::invalid_argument, "mobility is not symmetric");
  if (Eigen::LLT<Eigen::MatrixXd>(G).info() != Eigen::Success)
    fail(Errc::invalid_argument, "mobility is not positive definite");

  if (nudge(0.0, theta, y) != 0.0) fail(Errc::invalid_argument, "nudge does not vanish at beta = 0");

  auto check_fd = [&](const std::function<double(const Vec&)>& f, const Vec& analytic, const char* what) {
    Vec fd(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(y(k)));
      Vec yp = y, ym = y;
      yp(k) += h;
      ym(k) -= h;
      fd(k) = (f(yp) - f(ym)) / (2.0 * h);
    }
    const double denom = std::max({analytic.norm(), fd.norm(), 1e-8});
    if ((fd - analytic).norm() / denom > 1e-5)
      fail(Errc::invalid_argument, std::string(what) + " disagrees with finite differences");
  };
  check_fd([&](const Vec& z) { return energy(theta, z); }, energy_grad(theta, y), "energy gradient");
  check_fd([&](const Vec& z) { return nudge(beta_probe, theta, z); }, nudge_grad(beta_probe, theta, y),
           "nudge gradient");
}

double hessian_scale(const EnergySystem& system, const Vec& theta, double beta, const Vec& y) {
  const Eigen::MatrixXd G = system.mobility_matrix();
  const auto n = y.size();
  if (n == 0) return 0.0;
  const double h = 1e-4 * std::max(1.0, y.norm());
  auto hess_times = [&](const Vec& d) {
    return Vec((system.free_energy_grad(beta, theta, y + h * d) -
                system.free_energy_grad(beta, theta, y - h * d)) /
               (2.0 * h));
  };
  // Deterministic, generic start vector.
  Vec d(n);
  for (Eigen::Index k = 0; k < n; ++k) d(k) = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(k));
  d.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Vec next = G * hess_times(d);
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    const bool settled = std::abs(norm - lambda) <= 1e-10 * norm;
    lambda = norm;
    d = next / norm;
    if (settled) break;
  }
  return lambda;
}

Equilibrium relax(const EnergySystem& system, const Vec& theta, double beta, const Vec& y_init,
                  const RelaxOptions& opts) {
  if (!(opts.tol > 0.0)) fail(Errc::invalid_argument, "relaxation tolerance must be positive");
  if (y_init.size() != static_cast<Eigen::Index>(system.state_dim))
    fail(Errc::dimension_mismatch, "initial state has the wrong dimension");
  const Eigen::MatrixXd G = system.mobility_matrix();

  const double lambda = hessian_scale(system, theta, beta, y_init);
  double step = 0.0;
  if (opts.step) {
    step = *opts.step;
    if (!(step > 0.0)) fail(Errc::invalid_argument, "relaxation step must be positive");
    if (step * lambda >= 2.0 * (1.0 - 1e-6)) {
      std::ostringstream msg;
      msg << "step " << step << " violates the explicit-Euler bound 2/lambda_max = " << 2.0 / lambda
          << "; use a smaller step";
      fail(Errc::instability, msg.str());
    }
  } else {
    step = lambda > 0.0 ? 0.1 / lambda : 0.1;
  }

  Equilibrium eq;
  eq.beta = beta;
  eq.step = step;
  Vec y = y_init;
  double f = system.free_energy(beta, theta, y);
  std::size_t rising = 0;
  for (std::size_t it = 0;; ++it) {
    const Vec grad = system.free_energy_grad(beta, theta, y);
    const double res = grad.norm();
    if (!std::isfinite(res)) fail(Errc::instability, "relaxation produced a non-finite gradient");
    if (res <= opts.tol) {
      eq.y = std::move(y);
      eq.residual = res;
      eq.iterations = it;
      return eq;
    }
    if (it >= opts.max_iter) {
      std::ostringstream msg;
      msg << "relaxation did not converge in " << opts.max_iter << " iterations (residual " << res << ")";
      fail(Errc::non_convergence, msg.str());
    }
    y -= step * (G * grad);
    const double f_next = system.free_energy(beta, theta, y);
    if (f_next > f + 1e-13 * std::max(1.0, std::abs(f))) {
      ++eq.energy_increases;
      if (++rising >= 10) {
        std::ostringstream msg;
        msg << "energy rose for 10 consecutive steps with step " << step << "; use a smaller step";
        fail(Errc::instability, msg.str());
      }
    } else {
      rising = 0;
    }
    f = f_next;
  }
}

GepEstimate gep_estimate(const EnergySystem& system, const Vec& theta, double beta,
                         const RelaxOptions& opts) {
  if (beta == 0.0) fail(Errc::zero_nudge, "generalized two-phase estimate needs beta != 0");
  GepEstimate out;
  out.free = relax(system, theta, 0.0, system.start_state(), opts);
  out.nudged = relax(system, theta, beta, out.free.y, opts);
  out.estimate = (system.free_energy_param_grad(beta, theta, out.nudged.y) -
                  system.free_energy_param_grad(0.0, theta, out.free.y)) /
                 std::pow(beta, system.order);
  return out;
}

Vec objective_gradient_oracle(const EnergySystem& system, const Vec& theta, double delta,
                              const RelaxOptions& opts) {
  if (!(delta > 0.0)) fail(Errc::invalid_argument, "finite-difference step must be positive");
  Vec grad(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Vec tp = theta, tm = theta;
    tp(k) += delta;
    tm(k) -= delta;
    const Equilibrium ep = relax(system, tp, 0.0, system.start_state(), opts);
    const Equilibrium em = relax(system, tm, 0.0, system.start_state(), opts);
    grad(k) = (system.objective(tp, ep.y) - system.objective(tm, em.y)) / (2.0 * delta);
  }
  return grad;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(Errc::invalid_argument, "line fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (sxx == 0.0) fail(Errc::degenerate_fit, "line fit needs distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

OrderFit nudge_order_fit(const EnergySystem& system, const Vec& theta, const std::vector<double>& betas,
                         const RelaxOptions& opts) {
  if (betas.size() < 3) fail(Errc::invalid_argument, "order fit needs at least 3 nudge values");
  double lo = INFINITY, hi = 0.0;
  for (const double b : betas) {
    if (!(b > 0.0)) fail(Errc::invalid_argument, "order fit needs positive nudge values");
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  if (hi / lo < 1e3 * (1.0 - 1e-12)) fail(Errc::invalid_argument, "nudge values must span >= 3 decades");

  const Equilibrium free = relax(system, theta, 0.0, system.start_state(), opts);
  OrderFit fit;
  for (const double b : betas) {
    const double n = std::abs(system.nudge(b, theta, free.y));
    if (n == 0.0 || !std::isfinite(n))
      fail(Errc::degenerate_fit, "nudge vanishes at the free equilibrium; order is undefined");
    fit.log_beta.push_back(std::log(b));
    fit.log_nudge.push_back(std::log(n));
  }
  std::tie(fit.slope, fit.intercept) = fit_line(fit.log_beta, fit.log_nudge);
  return fit;
}

EnergySystem quadratic_ep_system(Eigen::MatrixXd H, Eigen::MatrixXd P, Vec target, int order,
                                 Eigen::MatrixXd mobility) {
  if (H.rows() != H.cols() || P.cols() != H.rows() || P.rows() != target.size())
    fail(Errc::dimension_mismatch, "quadratic system dimensions disagree");
  EnergySystem sys;
  sys.state_dim = static_cast<std::size_t>(H.rows());
  sys.param_dim = sys.state_dim;
  sys.order = order;
  sys.mobility = std::move(mobility);
  sys.energy = [H](const Vec& theta, const Vec& y) { return 0.5 * (y - theta).dot(H * (y - theta)); };
  sys.energy_grad = [H](const Vec& theta, const Vec& y) { return Vec(H * (y - theta)); };
  sys.energy_param_grad = [H](const Vec& theta, const Vec& y) { return Vec(-H * (y - theta)); };
  sys.nudge = [P, target, order](double beta, const Vec&, const Vec& y) {
    return std::pow(beta, order) * 0.5 * (P * y - target).squaredNorm();
  };
  sys.nudge_grad = [P, target, order](double beta, const Vec&, const Vec& y) {
    return Vec(std::pow(beta, order) * P.transpose() * (P * y - target));
  };
  sys.nudge_param_grad = [](double, const Vec& theta, const Vec&) { return Vec(Vec::Zero(theta.size())); };
  sys.objective = [P, target](const Vec&, const Vec& y) { return 0.5 * (P * y - target).squaredNorm(); };
  return sys;
}

EnergySystem quadratic_cl_system(Eigen::MatrixXd H, Eigen::MatrixXd P, Vec target, Eigen::MatrixXd mobility) {
  if (H.rows() != H.cols() || P.cols() != H.rows() || P.rows() != target.size())
    fail(Errc::dimension_mismatch, "quadratic system dimensions disagree");
  EnergySystem sys = quadratic_ep_system(H, P, target, 2, std::move(mobility));
  // Clamp direction d(y) = P^T (target - P y); clamped state z = y + beta d.
  auto dir = [P, target](const Vec& y) { return Vec(P.transpose() * (target - P * y)); };
  auto E = [H](const Vec& theta, const Vec& y) { return 0.5 * (y - theta).dot(H * (y - theta)); };
  sys.nudge = [E, dir](double beta, const Vec& theta, const Vec& y) {
    return E(theta, y + beta * dir(y)) - E(theta, y);
  };
  sys.nudge_grad = [H, P, dir](double beta, const Vec& theta, const Vec& y) {
    const Vec z = y + beta * dir(y);
    const Vec gz = H * (z - theta);
    // dz/dy = I - beta P^T P (symmetric)
    return Vec(gz - beta * P.transpose() * (P * gz) - H * (y - theta));
  };
  sys.nudge_param_grad = [H, dir](double beta, const Vec&, const Vec& y) {
    return Vec(-beta * (H * dir(y)));
  };
  sys.objective = [H, dir](const Vec&, const Vec& y) {
    const Vec d = dir(y);
    return 0.5 * d.dot(H * d);
  };
  return sys;
}

EnergySystem circuit_ep_system(const CycleMatrix& cycles, const Selectors& sel, Vec sources, Vec target) {
  const auto E = static_cast<Eigen::Index>(cycles.num_edges());
  if (sel.num_edges() != cycles.num_edges() || sources.size() != E ||
      target.size() != static_cast<Eigen::Index>(sel.num_outputs()))
    fail(Errc::dimension_mismatch, "circuit energy system dimensions disagree");
  const Eigen::MatrixXd A = cycles.A;
  // M(r) = -A^T (A R A^T)^-1 A
  auto response = [A, E](const Vec& r) -> Eigen::MatrixXd {
    if (A.rows() == 0) return Eigen::MatrixXd::Zero(E, E);
    const Eigen::LLT<Eigen::MatrixXd> llt(A * r.asDiagonal() * A.transpose());
    return -(A.transpose() * llt.solve(A));
  };

  EnergySystem sys;
  sys.state_dim = cycles.num_edges();
  sys.param_dim = cycles.num_edges();
  sys.order = 1;
  const Vec s = std::move(sources);
  sys.energy = [response, s](const Vec& r, const Vec& v) {
    const Eigen::MatrixXd M = response(r);
    return v.dot(v.cwiseQuotient(r)) - 2.0 * s.dot(M * (s + v));
  };
  sys.energy_grad = [response, s](const Vec& r, const Vec& v) {
    return Vec(2.0 * v.cwiseQuotient(r) - 2.0 * (response(r) * s));
  };
  sys.energy_param_grad = [response, s](const Vec& r, const Vec& v) {
    const Eigen::MatrixXd M = response(r);
    const Vec ms = M * s;
    const Vec msv = M * (s + v);
    return Vec(-v.cwiseProduct(v).cwiseQuotient(r.cwiseProduct(r)) - 2.0 * ms.cwiseProduct(msv));
  };
  sys.nudge = [sel, target](double beta, const Vec&, const Vec& v) {
    return beta * 0.5 * (sel.read_output(v) - target).squaredNorm();
  };
  sys.nudge_grad = [sel, target](double beta, const Vec&, const Vec& v) {
    return Vec(beta * sel.embed_output(sel.read_output(v) - target));
  };
  sys.nudge_param_grad = [](double, const Vec& r, const Vec&) { return Vec(Vec::Zero(r.size())); };
  sys.objective = [sel, target](const Vec&, const Vec& v) {
    return 0.5 * (sel.read_output(v) - target).squaredNorm();
  };
  return sys;
}

}  // namespace ohmgrad
