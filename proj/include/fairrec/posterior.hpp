#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "fairrec/model.hpp"

namespace fairrec {

/*
 * Noise/step schedule for the annealed sampler. Levels are geometric in
 * sigma: level l of L gets sigma_start * (sigma_end/sigma_start)^(l/(L-1)),
 * held for steps_per_level consecutive iterations (the final level absorbs
 * any remainder). Step size follows gamma_t = gamma_end * (sigma_t/sigma_end)^2,
 * which keeps the step-to-curvature ratio roughly level-independent.
 */
struct AnnealSchedule {
  double sigma_start = 1.0;
  double sigma_end = 0.01;
  long total_steps = 1500;
  int steps_per_level = 3;
  double gamma_end = 1e-4;

  void check() const;  // throws ValidationError
  int levels() const;
  double sigma_at(long step) const;
  double gamma_at(long step) const;
};

// Reconstruction rules mapping a measurement to a (possibly random) state.
// ExactPosterior / MapBaseline carry the prior the rule believes in, which
// need not match the prior data is drawn from.
struct ExactPosteriorKernel {
  DiscreteModel assumed;
};

struct MapBaselineKernel {
  DiscreteModel assumed;
};

struct FixedStochasticKernel {
  Eigen::MatrixXd rows;  // rows(y, x) = Pr(reconstruction = x | symbol y)
};

struct LangevinKernel {
  GaussianMixture mixture;
  AnnealSchedule schedule;
};

using ReconstructionKernel = std::variant<ExactPosteriorKernel, MapBaselineKernel,
                                          FixedStochasticKernel, LangevinKernel>;

// Posterior over states given symbol y under `model` and `channel`.
// Throws UnreachableMeasurementError when psi(y) = 0.
Eigen::VectorXd exact_posterior(const DiscreteModel& model,
                                const DiscreteChannel& channel, int y);

// Posterior mode; ties resolve to the lowest state index.
int map_reconstruct(const DiscreteModel& model, const DiscreteChannel& channel, int y);

// Law of the reconstruction given symbol y, as a vector over states.
// Defined for the three discrete kernel variants.
Eigen::VectorXd kernel_conditional(const ReconstructionKernel& kernel,
                                   const DiscreteChannel& channel, int y);

struct SampleResult {
  int state = -1;
  std::vector<int> groups;  // indices of every group containing `state`
};

// One draw from the kernel at symbol y. Deterministic in (kernel, y, seed).
SampleResult sample(const ReconstructionKernel& kernel, const DiscreteChannel& channel,
                    int y, const GroupCollection& groups, std::uint64_t seed);

// log density and score of the mixture convolved with N(0, sigma^2 I).
double smoothed_log_density(const GaussianMixture& mixture, double sigma,
                            const Eigen::VectorXd& x);
Eigen::VectorXd smoothed_score(const GaussianMixture& mixture, double sigma,
                               const Eigen::VectorXd& x);

/*
 * Annealed Langevin draw from the posterior of x under the mixture prior and
 * the linear-Gaussian measurement y = A x + noise.
 *
 *   x <- x + gamma_t * (score_sigma_t(x) + A^T (y - A x) / (sigma_t^2 + tau^2))
 *          + sqrt(2 gamma_t) * xi
 *
 * tau^2 is the channel's noise variance; the likelihood weight anneals with
 * sigma_t so early levels see a tempered data term and the final level the
 * true one. With tau = 0 (noise simulated at scale sigma_end elsewhere) the
 * weight reduces to 1/sigma_t^2. Starts at x0 ~ N(0, sigma_start^2 I).
 * Throws DivergenceError with the step index if an iterate goes non-finite.
 */
Eigen::VectorXd langevin_posterior_sample(const GaussianMixture& mixture,
                                          const GaussianLinearChannel& channel,
                                          const Eigen::VectorXd& y,
                                          const AnnealSchedule& schedule,
                                          std::uint64_t seed);

// chains x dimension matrix of independent draws; chain c uses the substream
// (seed, c), so results do not depend on the worker count.
Eigen::MatrixXd langevin_sample_many(const GaussianMixture& mixture,
                                     const GaussianLinearChannel& channel,
                                     const Eigen::VectorXd& y,
                                     const AnnealSchedule& schedule,
                                     std::uint64_t seed, long chains);

}  // namespace fairrec
