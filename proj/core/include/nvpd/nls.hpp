#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

// Weighted nonlinear least squares by damped (Levenberg-Marquardt)
// iteration. Shared engine behind every curve fit in the library.

namespace nvpd {

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One observation. `series` distinguishes branches of joint fits that share
// parameters (e.g. the two initial-state branches of a flip curve).
struct DataPoint {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
  int series = 0;
};

class CurveModel {
 public:
  virtual ~CurveModel() = default;
  virtual int parameter_count() const = 0;
  virtual double evaluate(const Eigen::VectorXd& params, double x,
                          int series) const = 0;
  // d evaluate / d params.
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& params, double x,
                                   int series) const = 0;
  virtual std::string name() const = 0;
};

struct NlsOptions {
  int max_iterations = 200;
  // Converged when ||step|| <= rel_step_tol * (||params|| + rel_step_tol).
  double rel_step_tol = 1e-10;
  // When true, weights are 1/sigma^2 and the covariance is (J^T W J)^-1;
  // otherwise it is scaled by the reduced chi-square.
  bool absolute_weights = false;
};

struct NlsResult {
  Eigen::VectorXd parameters;
  Eigen::MatrixXd covariance;
  double weighted_sse = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Throws FitError on a rank-deficient Jacobian; returns the best-so-far
// parameters with converged=false when the iteration budget runs out.
NlsResult nls_fit(const CurveModel& model, const std::vector<DataPoint>& data,
                  const Eigen::VectorXd& init, const NlsOptions& options = {});

}  // namespace nvpd
