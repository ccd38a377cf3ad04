#include "qdmem/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qdmem {

namespace {

constexpr double kBoundEps = 1e-12;

struct Workspace {
  const FitProblem& prob;
  const FitOptions& opts;
  std::vector<int> free_idx;        // positions of free parameters
  std::vector<double> diff_scale;   // finite-difference scale per parameter

  explicit Workspace(const FitProblem& p, const FitOptions& o)
      : prob(p), opts(o) {
    for (size_t j = 0; j < p.initial.size(); ++j)
      if (p.fixed.empty() || !p.fixed[j]) free_idx.push_back(static_cast<int>(j));
    for (double v : p.initial)
      diff_scale.push_back(std::max(std::abs(v), 1e-6));
  }

  double point_sigma(size_t i) const {
    return prob.sigma.empty() ? 1.0 : prob.sigma[i];
  }

  // residual vector; least-squares or Poisson deviance form
  bool residuals(const std::vector<double>& p, Eigen::VectorXd& r) const {
    const size_t n = prob.x.size();
    r.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      double m = prob.model(prob.x[i], p);
      if (!std::isfinite(m)) return false;
      if (opts.poisson_ml) {
        m = std::max(m, 1e-12);
        double y = prob.y[i];
        double dev = (y > 0.0) ? 2.0 * (y * std::log(y / m) - (y - m))
                               : 2.0 * m;
        r[static_cast<Eigen::Index>(i)] =
            (y >= m ? 1.0 : -1.0) * std::sqrt(std::max(dev, 0.0));
      } else {
        r[static_cast<Eigen::Index>(i)] = (prob.y[i] - m) / point_sigma(i);
      }
    }
    return true;
  }

  bool jacobian(const std::vector<double>& p, Eigen::MatrixXd& jac) const {
    const size_t n = prob.x.size();
    jac.resize(static_cast<Eigen::Index>(n),
               static_cast<Eigen::Index>(free_idx.size()));
    std::vector<double> pp = p;
    Eigen::VectorXd rp, rm;
    for (size_t c = 0; c < free_idx.size(); ++c) {
      int j = free_idx[c];
      double h = 1e-6 * diff_scale[static_cast<size_t>(j)];
      double keep = pp[static_cast<size_t>(j)];
      pp[static_cast<size_t>(j)] = keep + h;
      if (!residuals(pp, rp)) return false;
      pp[static_cast<size_t>(j)] = keep - h;
      if (!residuals(pp, rm)) return false;
      pp[static_cast<size_t>(j)] = keep;
      jac.col(static_cast<Eigen::Index>(c)) = (rp - rm) / (2.0 * h);
    }
    return true;
  }

  void clamp(std::vector<double>& p) const {
    for (size_t j = 0; j < p.size(); ++j) {
      if (!prob.lower.empty()) p[j] = std::max(p[j], prob.lower[j]);
      if (!prob.upper.empty()) p[j] = std::min(p[j], prob.upper[j]);
    }
  }

  bool at_bound(const std::vector<double>& p) const {
    for (int j : free_idx) {
      auto ju = static_cast<size_t>(j);
      double span = std::max(std::abs(p[ju]), 1.0);
      if (!prob.lower.empty() && p[ju] - prob.lower[ju] <= kBoundEps * span)
        return true;
      if (!prob.upper.empty() && prob.upper[ju] - p[ju] <= kBoundEps * span)
        return true;
    }
    return false;
  }
};

}  // namespace

int FitResult::index(std::string_view name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw std::out_of_range("FitResult: unknown parameter name");
}

double FitResult::value(std::string_view name) const {
  return values[static_cast<size_t>(index(name))];
}

double FitResult::sigma(std::string_view name) const {
  return sigmas[static_cast<size_t>(index(name))];
}

std::vector<double> poisson_sigmas(const std::vector<double>& counts) {
  std::vector<double> s(counts.size());
  for (size_t i = 0; i < counts.size(); ++i)
    s[i] = std::sqrt(std::max(counts[i], 1.0));
  return s;
}

FitResult fit_model(const FitProblem& problem, const FitOptions& opts) {
  const size_t n = problem.x.size();
  const size_t np = problem.initial.size();
  if (n == 0 || n != problem.y.size())
    throw std::invalid_argument("fit_model: empty or mismatched data");
  if (!problem.sigma.empty() && problem.sigma.size() != n)
    throw std::invalid_argument("fit_model: sigma size mismatch");
  if (problem.param_names.size() != np)
    throw std::invalid_argument("fit_model: parameter name/initial mismatch");
  if ((!problem.lower.empty() && problem.lower.size() != np) ||
      (!problem.upper.empty() && problem.upper.size() != np) ||
      (!problem.fixed.empty() && problem.fixed.size() != np))
    throw std::invalid_argument("fit_model: bounds/fixed size mismatch");

  Workspace ws(problem, opts);
  const size_t nf = ws.free_idx.size();

  FitResult out;
  out.names = problem.param_names;
  out.values = problem.initial;
  out.sigmas.assign(np, 0.0);
  out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np),
                                         static_cast<Eigen::Index>(np));
  out.dof = static_cast<int>(n) - static_cast<int>(nf);
  if (nf == 0) {
    out.message = "all parameters fixed";
    return out;
  }

  std::vector<double> p = problem.initial;
  ws.clamp(p);

  Eigen::VectorXd r;
  if (!ws.residuals(p, r)) {
    out.message = "model not finite at initial parameters";
    return out;
  }
  double cost = 0.5 * r.squaredNorm();

  Eigen::MatrixXd jac;
  if (!ws.jacobian(p, jac)) {
    out.message = "jacobian not finite at initial parameters";
    return out;
  }
  Eigen::MatrixXd hess = jac.transpose() * jac;
  Eigen::VectorXd grad = jac.transpose() * r;

  double mu = 1e-3 * hess.diagonal().maxCoeff();
  if (!(mu > 0.0)) mu = 1e-3;
  double nu = 2.0;

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < opts.gradient_tol * (1.0 + cost)) {
      out.converged = true;
      out.message = "gradient below tolerance";
      break;
    }
    Eigen::MatrixXd damped = hess;
    damped.diagonal().array() += mu;
    Eigen::VectorXd step = damped.ldlt().solve(-grad);
    if (!step.allFinite()) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }

    std::vector<double> pn = p;
    for (size_t c = 0; c < nf; ++c)
      pn[static_cast<size_t>(ws.free_idx[c])] += step[static_cast<Eigen::Index>(c)];
    ws.clamp(pn);
    Eigen::VectorXd actual(static_cast<Eigen::Index>(nf));
    double pnorm = 0.0;
    for (size_t c = 0; c < nf; ++c) {
      auto j = static_cast<size_t>(ws.free_idx[c]);
      actual[static_cast<Eigen::Index>(c)] = pn[j] - p[j];
      pnorm += p[j] * p[j];
    }
    pnorm = std::sqrt(pnorm);

    Eigen::VectorXd rn;
    double ncost = std::numeric_limits<double>::infinity();
    if (ws.residuals(pn, rn)) ncost = 0.5 * rn.squaredNorm();

    double predicted = 0.5 * actual.dot(mu * actual - grad);
    double rho = (predicted > 0.0) ? (cost - ncost) / predicted : -1.0;

    if (std::isfinite(ncost) && rho > 0.0) {
      p = pn;
      r = rn;
      cost = ncost;
      if (!ws.jacobian(p, jac)) {
        out.message = "jacobian not finite during iteration";
        break;
      }
      hess = jac.transpose() * jac;
      grad = jac.transpose() * r;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (actual.norm() < opts.step_tol * (pnorm + opts.step_tol)) {
        out.converged = true;
        out.message = "step below tolerance";
        break;
      }
    } else {
      // quantized data leaves a cost floor the model cannot go below; once
      // even the predicted reduction is negligible the fit is done
      if (predicted >= 0.0 &&
          predicted <= opts.cost_tol * std::max(cost, 1e-300)) {
        out.converged = true;
        out.message = "cost reduction below tolerance";
        break;
      }
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu)) {
        out.message = "damping overflow, no acceptable step";
        break;
      }
    }
  }
  if (iter == opts.max_iterations)
    out.message = "iteration limit reached";

  // covariance from the unscaled normal equations at the solution
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  double cutoff = smax * 1e-12;
  out.ill_conditioned = (smax == 0.0) || (sv[sv.size() - 1] < cutoff);
  Eigen::MatrixXd cov_free = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] <= cutoff) continue;
    cov_free += svd.matrixV().col(k) * svd.matrixV().col(k).transpose() /
                (sv[k] * sv[k]);
  }

  out.values = p;
  out.chi2 = r.squaredNorm();
  out.iterations = iter;
  out.clamped = ws.at_bound(p);
  for (size_t a = 0; a < nf; ++a) {
    auto ja = static_cast<Eigen::Index>(ws.free_idx[a]);
    for (size_t b = 0; b < nf; ++b) {
      auto jb = static_cast<Eigen::Index>(ws.free_idx[b]);
      out.covariance(ja, jb) = cov_free(static_cast<Eigen::Index>(a),
                                        static_cast<Eigen::Index>(b));
    }
    out.sigmas[static_cast<size_t>(ja)] =
        std::sqrt(std::max(out.covariance(ja, ja), 0.0));
  }
  return out;
}

}  // namespace qdmem
