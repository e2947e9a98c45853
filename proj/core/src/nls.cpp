#include "nvpd/nls.hpp"

#include <cmath>

namespace nvpd {

namespace {

double weighted_sse(const CurveModel& model, const std::vector<DataPoint>& data,
                    const Eigen::VectorXd& params) {
  double sse = 0.0;
  for (const auto& d : data) {
    const double r = d.y - model.evaluate(params, d.x, d.series);
    sse += d.weight * r * r;
  }
  return sse;
}

}  // namespace

NlsResult nls_fit(const CurveModel& model, const std::vector<DataPoint>& data,
                  const Eigen::VectorXd& init, const NlsOptions& options) {
  const int n = model.parameter_count();
  const auto m = static_cast<Eigen::Index>(data.size());
  if (init.size() != n) throw FitError("initial guess has wrong dimension");
  if (m < n) throw FitError("fewer data points than parameters");
  for (const auto& d : data)
    if (!(d.weight > 0.0)) throw FitError("weights must be positive");

  Eigen::VectorXd params = init;
  double sse = weighted_sse(model, data, params);
  if (!std::isfinite(sse)) throw FitError("model not finite at initial guess");

  NlsResult result;
  result.parameters = params;
  result.weighted_sse = sse;

  Eigen::MatrixXd jtj(n, n);
  Eigen::VectorXd jtr(n);
  double mu = 1e-3;
  bool refresh = true;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    if (refresh) {
      jtj.setZero();
      jtr.setZero();
      for (const auto& d : data) {
        const Eigen::VectorXd g = model.gradient(params, d.x, d.series);
        const double r = d.y - model.evaluate(params, d.x, d.series);
        jtj.noalias() += d.weight * g * g.transpose();
        jtr.noalias() += d.weight * r * g;
      }
      refresh = false;
    }

    Eigen::MatrixXd damped = jtj;
    for (int j = 0; j < n; ++j) {
      const double dj = jtj(j, j);
      damped(j, j) += mu * (dj > 1e-300 ? dj : 1e-300);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(jtr);
    if (!step.allFinite()) {
      mu *= 10.0;
      if (mu > 1e14) break;
      continue;
    }

    const Eigen::VectorXd trial = params + step;
    const double trial_sse = weighted_sse(model, data, trial);
    if (std::isfinite(trial_sse) && trial_sse <= sse) {
      params = trial;
      sse = trial_sse;
      result.parameters = params;
      result.weighted_sse = sse;
      mu = std::max(mu * 0.1, 1e-14);
      refresh = true;
      if (step.norm() <=
          options.rel_step_tol * (params.norm() + options.rel_step_tol)) {
        result.converged = true;
        break;
      }
    } else {
      mu *= 10.0;
      if (mu > 1e14) break;
    }
  }

  // Covariance from the Jacobian at the optimum.
  jtj.setZero();
  for (const auto& d : data) {
    const Eigen::VectorXd g = model.gradient(result.parameters, d.x, d.series);
    jtj.noalias() += d.weight * g * g.transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (!lu.isInvertible())
    throw FitError("rank-deficient Jacobian in " + model.name());
  result.covariance = lu.inverse();
  if (!options.absolute_weights && m > n)
    result.covariance *= result.weighted_sse / static_cast<double>(m - n);
  return result;
}

}  // namespace nvpd
