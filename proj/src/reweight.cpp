#include "fairrec/reweight.hpp"

#include <cmath>
#include <limits>

#include "fairrec/errors.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/posterior.hpp"

namespace fairrec {

namespace {

Eigen::VectorXd normalized_weights(const Eigen::VectorXd& lambda, int k) {
  if (lambda.size() != k) {
    throw ValidationError("reweight: weight count does not match group count");
  }
  for (int i = 0; i < k; ++i) {
    if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i])) {
      throw ValidationError("reweight: weights must be strictly positive and finite");
    }
  }
  return lambda / lambda.sum();
}

}  // namespace

DiscreteModel reweighted_model(const DiscreteModel& model,
                               const GroupCollection& partition,
                               const Eigen::VectorXd& lambda) {
  require_valid(model, &partition);
  if (!partition.partition(model.num_states())) {
    throw PreconditionError("reweighted_model: groups must partition the states");
  }
  const int k = partition.size();
  const Eigen::VectorXd lam = normalized_weights(lambda, k);

  DiscreteModel out = model;
  for (int g = 0; g < k; ++g) {
    double mass = 0.0;
    for (int s : partition.groups[g].members) mass += model.prior[s];
    if (!(mass > 0.0)) {
      throw PreconditionError("reweighted_model: group '" + partition.groups[g].name +
                              "' has zero mass, conditional undefined");
    }
    for (int s : partition.groups[g].members) {
      out.prior[s] = model.prior[s] * lam[g] / mass;
    }
  }
  return out;
}

AlphaReport alpha_under_weights(const DiscreteModel& model,
                                const DiscreteChannel& channel,
                                const GroupCollection& partition,
                                const Eigen::VectorXd& lambda, TruthMode mode) {
  const DiscreteModel tilted = reweighted_model(model, partition, lambda);
  const DiscreteModel& truth = (mode == TruthMode::kReweighted) ? tilted : model;
  const JointGroupMatrix jgm = joint_group_matrix(
      truth, channel, ExactPosteriorKernel{tilted}, partition);
  const RdpReport rdp = rdp_vector(jgm);
  AlphaReport rep;
  rep.alpha = rdp.alpha;
  const double lo = rep.alpha.minCoeff();
  if (!(lo > 0.0)) {
    throw PreconditionError("alpha_under_weights: a group is never recovered; "
                            "ratio undefined");
  }
  rep.ratio = rep.alpha.maxCoeff() / lo;
  return rep;
}

ReweightResult solve_rdp_weights(const DiscreteModel& model,
                                 const DiscreteChannel& channel,
                                 const GroupCollection& partition,
                                 const ReweightOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("solve_rdp_weights: tol must be positive");
  if (options.max_iterations < 0) {
    throw ValidationError("solve_rdp_weights: negative iteration budget");
  }
  if (!(options.damping > 0.0) || options.damping > 1.0) {
    throw ValidationError("solve_rdp_weights: damping must lie in (0, 1]");
  }
  const int k = partition.size();
  ReweightResult res;
  Eigen::VectorXd lam = Eigen::VectorXd::Constant(k, 1.0 / k);

  double best = std::numeric_limits<double>::infinity();
  double prev_max = std::numeric_limits<double>::infinity();
  double prev_min = -std::numeric_limits<double>::infinity();
  for (int it = 0; it <= options.max_iterations; ++it) {
    const AlphaReport a = alpha_under_weights(model, channel, partition, lam, options.mode);
    res.trace.push_back({it, lam, a.alpha, a.ratio});
    res.iterations = it;

    const double amax = a.alpha.maxCoeff();
    const double amin = a.alpha.minCoeff();
    if (it > 0 && (amax > prev_max + 1e-12 || amin < prev_min - 1e-12)) {
      res.monotonicity_violations.push_back(it);
    }
    prev_max = amax;
    prev_min = amin;

    if (a.ratio < best) {
      best = a.ratio;
      res.lambda = lam;
      res.alpha = a.alpha;
      res.ratio = a.ratio;
    }
    if (a.ratio <= 1.0 + options.tol) {
      res.converged = true;
      break;
    }
    if (it == options.max_iterations) break;

    // raise the weight of every group at or below the geometric midpoint
    const double r = a.ratio;
    const double cut = std::sqrt(r) * amin;
    const double bump = std::pow(r, 0.25 * options.damping);
    for (int g = 0; g < k; ++g) {
      if (a.alpha[g] <= cut) lam[g] *= bump;
    }
    lam /= lam.sum();
  }
  return res;
}

}  // namespace fairrec
