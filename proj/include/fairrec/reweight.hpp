#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fairrec/model.hpp"

namespace fairrec {

// Per-group reconstruction accuracies under a candidate weighting and the
// max/min ratio the solver drives toward 1.
struct AlphaReport {
  Eigen::VectorXd alpha;
  double ratio = 1.0;
};

// Which prior the true state is drawn from when evaluating the accuracies.
// kReweighted (default): truth and the sampler share the reweighted prior,
// the setting in which equal group masses make two-class accuracies equal
// exactly. kOriginal: truth keeps the unmodified prior while the sampler
// assumes the reweighted one.
enum class TruthMode { kReweighted, kOriginal };

// Prior with group i mass scaled to lambda[i] while conditionals within each
// group are preserved. Requires a partition and strictly positive lambda;
// lambda is normalized internally, so scaling it by a constant is a no-op.
DiscreteModel reweighted_model(const DiscreteModel& model,
                               const GroupCollection& partition,
                               const Eigen::VectorXd& lambda);

// Accuracies of posterior sampling under the reweighted prior.
AlphaReport alpha_under_weights(const DiscreteModel& model,
                                const DiscreteChannel& channel,
                                const GroupCollection& partition,
                                const Eigen::VectorXd& lambda,
                                TruthMode mode = TruthMode::kReweighted);

struct ReweightIterate {
  int iteration = 0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd alpha;
  double ratio = 1.0;
};

struct ReweightOptions {
  double tol = 1e-6;      // stop when ratio <= 1 + tol
  int max_iterations = 500;
  // exponent scale on the multiplicative update; 1 reproduces the r^(1/4)
  // step, values in (0, 1) damp it
  double damping = 1.0;
  TruthMode mode = TruthMode::kReweighted;
};

struct ReweightResult {
  Eigen::VectorXd lambda;      // best iterate found
  Eigen::VectorXd alpha;
  double ratio = 1.0;
  bool converged = false;      // ratio <= 1 + tol reached
  int iterations = 0;
  std::vector<ReweightIterate> trace;
  // iterations where max alpha rose or min alpha fell by more than 1e-12;
  // expected empty, surfaced for inspection rather than thrown
  std::vector<int> monotonicity_violations;
};

/*
 * Iterates from uniform lambda: compute alpha, let r = max/min; groups with
 * alpha_i <= sqrt(r) * min alpha get their weight multiplied by r^(damping/4);
 * renormalize and repeat until r <= 1 + tol or the iteration budget runs out.
 * Non-convergence is reported in the result, not thrown.
 */
ReweightResult solve_rdp_weights(const DiscreteModel& model,
                                 const DiscreteChannel& channel,
                                 const GroupCollection& partition,
                                 const ReweightOptions& options = {});

}  // namespace fairrec
