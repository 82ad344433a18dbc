#include "fairrec/posterior.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "fairrec/errors.hpp"
#include "fairrec/parallel.hpp"
#include "fairrec/rng.hpp"

namespace fairrec {

void AnnealSchedule::check() const {
  if (!(sigma_end > 0.0) || !(sigma_start >= sigma_end)) {
    throw ValidationError("schedule: need sigma_start >= sigma_end > 0");
  }
  if (total_steps < 0) throw ValidationError("schedule: total_steps must be >= 0");
  if (steps_per_level < 1) throw ValidationError("schedule: steps_per_level must be >= 1");
  if (!(gamma_end > 0.0)) throw ValidationError("schedule: gamma_end must be positive");
}

int AnnealSchedule::levels() const {
  if (total_steps == 0) return 0;
  return static_cast<int>(std::max<long>(1, total_steps / steps_per_level));
}

double AnnealSchedule::sigma_at(long step) const {
  const int L = levels();
  if (L <= 1) return sigma_start;
  long level = step / steps_per_level;
  if (level >= L) level = L - 1;  // remainder steps stay at the last level
  const double ratio = std::pow(sigma_end / sigma_start,
                                static_cast<double>(level) / static_cast<double>(L - 1));
  return sigma_start * ratio;
}

double AnnealSchedule::gamma_at(long step) const {
  const double s = sigma_at(step);
  return gamma_end * (s / sigma_end) * (s / sigma_end);
}

Eigen::VectorXd exact_posterior(const DiscreteModel& model,
                                const DiscreteChannel& channel, int y) {
  const int n = model.num_states();
  if (y < 0 || y >= channel.num_symbols()) {
    throw ValidationError("exact_posterior: symbol index " + std::to_string(y) +
                          " out of range");
  }
  if (static_cast<int>(channel.rows.rows()) != n) {
    throw ValidationError("exact_posterior: channel/model state count mismatch");
  }
  Eigen::VectorXd joint = model.prior.cwiseProduct(channel.rows.col(y));
  const double psi = joint.sum();
  if (!(psi > 0.0)) {
    throw UnreachableMeasurementError(
        "exact_posterior: symbol " + std::to_string(y) +
        " has zero probability under the assumed model");
  }
  return joint / psi;
}

int map_reconstruct(const DiscreteModel& model, const DiscreteChannel& channel, int y) {
  const Eigen::VectorXd post = exact_posterior(model, channel, y);
  int best = 0;
  for (int i = 1; i < post.size(); ++i) {
    if (post[i] > post[best]) best = i;  // strict: ties keep the lowest index
  }
  return best;
}

Eigen::VectorXd kernel_conditional(const ReconstructionKernel& kernel,
                                   const DiscreteChannel& channel, int y) {
  if (const auto* k = std::get_if<ExactPosteriorKernel>(&kernel)) {
    return exact_posterior(k->assumed, channel, y);
  }
  if (const auto* k = std::get_if<MapBaselineKernel>(&kernel)) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k->assumed.num_states());
    out[map_reconstruct(k->assumed, channel, y)] = 1.0;
    return out;
  }
  if (const auto* k = std::get_if<FixedStochasticKernel>(&kernel)) {
    if (y < 0 || y >= k->rows.rows()) {
      throw ValidationError("kernel_conditional: symbol index out of range");
    }
    return k->rows.row(y);
  }
  throw PreconditionError("kernel_conditional: kernel has no per-symbol state law");
}

SampleResult sample(const ReconstructionKernel& kernel, const DiscreteChannel& channel,
                    int y, const GroupCollection& groups, std::uint64_t seed) {
  const Eigen::VectorXd law = kernel_conditional(kernel, channel, y);
  Rng rng(seed);
  SampleResult out;
  out.state = rng.categorical(law);
  for (int g = 0; g < groups.size(); ++g) {
    if (groups.contains(g, out.state)) out.groups.push_back(g);
  }
  return out;
}

namespace {

// log sum_c w_c N(x; mu_c, (v_c + sigma^2) I), stable in the far tails
double mixture_log_density(const GaussianMixture& mix, double sigma2,
                           const Eigen::VectorXd& x, Eigen::VectorXd* resp) {
  const int C = mix.components();
  const int d = mix.dimension();
  Eigen::VectorXd logs(C);
  for (int c = 0; c < C; ++c) {
    const double v = mix.variances[c] + sigma2;
    const double sq = (x - mix.means.row(c).transpose()).squaredNorm();
    logs[c] = std::log(mix.weights[c]) - 0.5 * sq / v -
              0.5 * d * std::log(2.0 * M_PI * v);
  }
  const double m = logs.maxCoeff();
  const double z = (logs.array() - m).exp().sum();
  if (resp) *resp = ((logs.array() - m).exp() / z).matrix();
  return m + std::log(z);
}

}  // namespace

double smoothed_log_density(const GaussianMixture& mixture, double sigma,
                            const Eigen::VectorXd& x) {
  require_valid(mixture);
  if (sigma < 0.0) throw ValidationError("smoothed_log_density: sigma must be >= 0");
  if (x.size() != mixture.dimension()) {
    throw ValidationError("smoothed_log_density: point dimension mismatch");
  }
  return mixture_log_density(mixture, sigma * sigma, x, nullptr);
}

Eigen::VectorXd smoothed_score(const GaussianMixture& mixture, double sigma,
                               const Eigen::VectorXd& x) {
  require_valid(mixture);
  if (sigma < 0.0) throw ValidationError("smoothed_score: sigma must be >= 0");
  if (x.size() != mixture.dimension()) {
    throw ValidationError("smoothed_score: point dimension mismatch");
  }
  Eigen::VectorXd resp;
  mixture_log_density(mixture, sigma * sigma, x, &resp);
  Eigen::VectorXd score = Eigen::VectorXd::Zero(x.size());
  for (int c = 0; c < mixture.components(); ++c) {
    const double v = mixture.variances[c] + sigma * sigma;
    score += resp[c] / v * (mixture.means.row(c).transpose() - x);
  }
  return score;
}

Eigen::VectorXd langevin_posterior_sample(const GaussianMixture& mixture,
                                          const GaussianLinearChannel& channel,
                                          const Eigen::VectorXd& y,
                                          const AnnealSchedule& schedule,
                                          std::uint64_t seed) {
  require_valid(mixture);
  schedule.check();
  if (channel.A.cols() != mixture.dimension()) {
    throw ValidationError("langevin: operator width does not match mixture dimension");
  }
  if (channel.A.rows() != y.size()) {
    throw ValidationError("langevin: measurement length does not match operator rows");
  }
  if (!(channel.sigma >= 0.0)) {
    throw ValidationError("langevin: channel sigma must be >= 0");
  }
  const double tau2 = channel.sigma > 0.0 ? channel.noise_variance() : 0.0;

  Rng rng(seed);
  const int d = mixture.dimension();
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = schedule.sigma_start * rng.normal();

  Eigen::VectorXd resp;
  for (long t = 0; t < schedule.total_steps; ++t) {
    const double s = schedule.sigma_at(t);
    const double gamma = schedule.gamma_at(t);
    mixture_log_density(mixture, s * s, x, &resp);
    Eigen::VectorXd drift = Eigen::VectorXd::Zero(d);
    for (int c = 0; c < mixture.components(); ++c) {
      const double v = mixture.variances[c] + s * s;
      drift += resp[c] / v * (mixture.means.row(c).transpose() - x);
    }
    drift += channel.A.transpose() * (y - channel.A * x) / (s * s + tau2);
    const double noise_scale = std::sqrt(2.0 * gamma);
    for (int i = 0; i < d; ++i) {
      x[i] += gamma * drift[i] + noise_scale * rng.normal();
    }
    if (!x.allFinite()) {
      throw DivergenceError("langevin: non-finite iterate at step " + std::to_string(t), t);
    }
  }
  return x;
}

Eigen::MatrixXd langevin_sample_many(const GaussianMixture& mixture,
                                     const GaussianLinearChannel& channel,
                                     const Eigen::VectorXd& y,
                                     const AnnealSchedule& schedule,
                                     std::uint64_t seed, long chains) {
  if (chains < 0) throw ValidationError("langevin_sample_many: chains must be >= 0");
  Eigen::MatrixXd out(chains, mixture.dimension());
  std::exception_ptr failure;
  std::mutex failure_mu;
  parallel_blocks(static_cast<std::size_t>(chains), [&](std::size_t c) {
    try {
      out.row(static_cast<Eigen::Index>(c)) = langevin_posterior_sample(
          mixture, channel, y, schedule, derive_stream_seed(seed, c));
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace fairrec
