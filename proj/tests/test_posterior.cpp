#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>

#include "fairrec/errors.hpp"
#include "fairrec/model.hpp"
#include "fairrec/posterior.hpp"
#include "fairrec/rng.hpp"

using namespace fairrec;

namespace {

DiscreteModel catdog_model() {
  DiscreteModel m;
  m.states = {"cat", "dog"};
  m.prior = Eigen::Vector2d(0.2, 0.8);
  return m;
}

DiscreteChannel catdog_channel() {
  DiscreteChannel c;
  c.symbols = {"y_cat", "y_dog"};
  c.rows.resize(2, 2);
  c.rows << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
  return c;
}

Eigen::VectorXd random_distribution(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

}  // namespace

TEST_CASE("cat/dog posterior puts at least 2/3 on dog at every symbol") {
  const DiscreteModel m = catdog_model();
  const DiscreteChannel c = catdog_channel();
  const Eigen::VectorXd post_cat_symbol = exact_posterior(m, c, 0);
  const Eigen::VectorXd post_dog_symbol = exact_posterior(m, c, 1);
  CHECK(post_cat_symbol[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(post_dog_symbol[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
  CHECK(post_cat_symbol[1] >= 2.0 / 3.0 - 1e-12);
  CHECK(post_dog_symbol[1] >= 2.0 / 3.0 - 1e-12);
  CHECK(map_reconstruct(m, c, 0) == 1);
  CHECK(map_reconstruct(m, c, 1) == 1);
}

TEST_CASE("posterior satisfies Bayes consistency on random models") {
  // sum_y psi(y) * posterior(.|y) must reproduce the prior exactly
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = Rng::substream(100, trial);
    const int n = static_cast<int>(rng.uniform_int(2, 10));
    const int ny = static_cast<int>(rng.uniform_int(2, 10));
    DiscreteModel m;
    for (int s = 0; s < n; ++s) m.states.push_back("s" + std::to_string(s));
    m.prior = random_distribution(rng, n);
    DiscreteChannel c;
    c.rows.resize(n, ny);
    for (int s = 0; s < n; ++s) c.rows.row(s) = random_distribution(rng, ny).transpose();
    for (int y = 0; y < ny; ++y) c.symbols.push_back("y" + std::to_string(y));

    const Eigen::VectorXd psi = induced_measurement_distribution(m, c);
    Eigen::VectorXd mixed = Eigen::VectorXd::Zero(n);
    for (int y = 0; y < ny; ++y) mixed += psi[y] * exact_posterior(m, c, y);
    CHECK((mixed - m.prior).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("conditioning on an unreachable symbol throws") {
  DiscreteModel m;
  m.states = {"a", "b"};
  m.prior = Eigen::Vector2d(1.0, 0.0);
  DiscreteChannel c;
  c.symbols = {"y0", "y1"};
  c.rows = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(exact_posterior(m, c, 1), UnreachableMeasurementError);
  CHECK_THROWS_AS(map_reconstruct(m, c, 1), UnreachableMeasurementError);
}

TEST_CASE("map ties resolve to the lowest state index") {
  DiscreteModel m;
  m.states = {"a", "b"};
  m.prior = Eigen::Vector2d(0.5, 0.5);
  DiscreteChannel c;
  c.symbols = {"y"};
  c.rows = Eigen::MatrixXd::Ones(2, 1);
  CHECK(map_reconstruct(m, c, 0) == 0);
}

TEST_CASE("kernel conditionals agree with their definitions") {
  const DiscreteModel m = catdog_model();
  const DiscreteChannel c = catdog_channel();

  const ReconstructionKernel exact = ExactPosteriorKernel{m};
  const ReconstructionKernel map = MapBaselineKernel{m};
  Eigen::MatrixXd fixed_rows(2, 2);
  fixed_rows << 0.25, 0.75, 0.5, 0.5;
  const ReconstructionKernel fixed = FixedStochasticKernel{fixed_rows};

  for (int y = 0; y < 2; ++y) {
    const Eigen::VectorXd post = exact_posterior(m, c, y);
    CHECK((kernel_conditional(exact, c, y) - post).cwiseAbs().maxCoeff() < 1e-15);
    const Eigen::VectorXd map_law = kernel_conditional(map, c, y);
    CHECK(map_law[1] == 1.0);  // dog everywhere
    CHECK(map_law.sum() == doctest::Approx(1.0));
    CHECK((kernel_conditional(fixed, c, y) - fixed_rows.row(y).transpose())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("sampling is deterministic in the seed and matches the conditional law") {
  const DiscreteModel m = catdog_model();
  const DiscreteChannel c = catdog_channel();
  GroupCollection gc;
  gc.groups = {Group{"cats", {0}}, Group{"dogs", {1}}};
  const ReconstructionKernel kernel = ExactPosteriorKernel{m};

  const SampleResult once = sample(kernel, c, 0, gc, 77);
  const SampleResult again = sample(kernel, c, 0, gc, 77);
  CHECK(once.state == again.state);
  CHECK(once.groups == again.groups);
  REQUIRE(once.groups.size() == 1);
  CHECK(once.groups[0] == once.state);  // singleton groups mirror states

  int dogs = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    if (sample(kernel, c, 0, gc, 1000 + i).state == 1) ++dogs;
  }
  const double p = 2.0 / 3.0;
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(dogs) / n - p) < 5 * se);
}

TEST_CASE("smoothed log density matches the closed form for one component") {
  GaussianMixture mix;
  mix.weights = Eigen::VectorXd::Ones(1);
  mix.means.resize(1, 2);
  mix.means << 0.5, -1.0;
  mix.variances = Eigen::VectorXd::Constant(1, 0.7);

  const double sigma = 0.3;
  const double var = 0.7 + sigma * sigma;
  Eigen::Vector2d x(0.2, 0.4);
  const double expect = -std::log(2.0 * M_PI * var) -
                        (x - Eigen::Vector2d(0.5, -1.0)).squaredNorm() / (2.0 * var);
  CHECK(smoothed_log_density(mix, sigma, x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("smoothed score agrees with finite differences") {
  GaussianMixture mix;
  mix.weights = Eigen::Vector2d(0.2, 0.8);
  mix.means.resize(2, 2);
  mix.means << -2.0, 0.5, 2.0, -0.5;
  mix.variances = Eigen::Vector2d(0.25, 1.5);

  Rng rng(5);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const double sigma = rng.uniform(0.05, 2.0);
    Eigen::Vector2d x(rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0));
    const Eigen::VectorXd score = smoothed_score(mix, sigma, x);
    for (int d = 0; d < 2; ++d) {
      Eigen::Vector2d hi = x, lo = x;
      hi[d] += h;
      lo[d] -= h;
      const double fd =
          (smoothed_log_density(mix, sigma, hi) - smoothed_log_density(mix, sigma, lo)) /
          (2 * h);
      CHECK(score[d] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("anneal schedule endpoints and validation") {
  AnnealSchedule s;
  s.sigma_start = 2.0;
  s.sigma_end = 0.01;
  s.total_steps = 1500;
  s.steps_per_level = 3;
  CHECK_NOTHROW(s.check());
  CHECK(s.levels() == 500);
  CHECK(s.sigma_at(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.sigma_at(1499) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(s.gamma_at(1499) == doctest::Approx(s.gamma_end).epsilon(1e-12));
  // gamma scales with sigma^2
  CHECK(s.gamma_at(0) ==
        doctest::Approx(s.gamma_end * (2.0 / 0.01) * (2.0 / 0.01)).epsilon(1e-9));

  SUBCASE("bad schedules throw") {
    AnnealSchedule bad = s;
    bad.sigma_end = 3.0;  // must shrink
    CHECK_THROWS_AS(bad.check(), ValidationError);
    bad = s;
    bad.total_steps = -1;
    CHECK_THROWS_AS(bad.check(), ValidationError);
    bad = s;
    bad.gamma_end = 0.0;
    CHECK_THROWS_AS(bad.check(), ValidationError);
  }
}

TEST_CASE("langevin recovers a conjugate gaussian posterior") {
  GaussianMixture mix;
  mix.weights = Eigen::VectorXd::Ones(1);
  mix.means.resize(1, 1);
  mix.means << 0.5;
  mix.variances = Eigen::VectorXd::Ones(1);

  GaussianLinearChannel chan;
  chan.A = Eigen::MatrixXd::Ones(1, 1);
  chan.sigma = 0.1;

  Eigen::VectorXd y(1);
  y << 1.2;

  AnnealSchedule sched;
  sched.sigma_start = 2.0;
  sched.sigma_end = 0.01;
  sched.total_steps = 1500;
  sched.steps_per_level = 3;
  sched.gamma_end = 1e-4;

  const long chains = 2000;
  const Eigen::MatrixXd draws = langevin_sample_many(mix, chan, y, sched, 11, chains);
  REQUIRE(draws.rows() == chains);
  REQUIRE(draws.cols() == 1);

  // precision 1/1 + 1/0.01 = 101: mean 120.5/101, sd 1/sqrt(101)
  const double target_mean = 120.5 / 101.0;
  const double target_sd = 1.0 / std::sqrt(101.0);
  const double mean = draws.col(0).mean();
  const double sd = std::sqrt((draws.col(0).array() - mean).square().sum() / (chains - 1));
  CHECK(std::abs(mean - target_mean) < 4 * sd / std::sqrt(static_cast<double>(chains)));
  CHECK(sd == doctest::Approx(target_sd).epsilon(0.15));
}

TEST_CASE("langevin chains are independent of worker count and call order") {
  GaussianMixture mix;
  mix.weights = Eigen::Vector2d(0.2, 0.8);
  mix.means.resize(2, 1);
  mix.means << -2.0, 2.0;
  mix.variances = Eigen::Vector2d(0.25, 0.25);

  GaussianLinearChannel chan;
  chan.A = Eigen::MatrixXd::Ones(1, 1);
  chan.sigma = 2.0;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(1);

  AnnealSchedule sched;
  sched.sigma_start = 4.0;
  sched.sigma_end = 0.05;
  sched.total_steps = 300;  // short run, this is only about determinism
  sched.steps_per_level = 3;
  sched.gamma_end = 4e-4;

  setenv("FAIRREC_THREADS", "1", 1);
  const Eigen::MatrixXd serial = langevin_sample_many(mix, chan, y, sched, 21, 8);
  setenv("FAIRREC_THREADS", "4", 1);
  const Eigen::MatrixXd parallel = langevin_sample_many(mix, chan, y, sched, 21, 8);
  unsetenv("FAIRREC_THREADS");
  CHECK((serial - parallel).cwiseAbs().maxCoeff() == 0.0);

  // each chain is the substream (seed, chain) draw
  const Eigen::VectorXd chain3 = langevin_posterior_sample(
      mix, chan, y, sched, derive_stream_seed(21, 3));
  CHECK((parallel.row(3).transpose() - chain3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("divergent step sizes raise with the step index") {
  GaussianMixture mix;
  mix.weights = Eigen::VectorXd::Ones(1);
  mix.means.resize(1, 1);
  mix.means << 0.0;
  mix.variances = Eigen::VectorXd::Ones(1);

  GaussianLinearChannel chan;
  chan.A = Eigen::MatrixXd::Ones(1, 1);
  chan.sigma = 0.01;
  Eigen::VectorXd y(1);
  y << 1.0;

  AnnealSchedule sched;
  sched.sigma_start = 1.0;
  sched.sigma_end = 0.5;
  sched.total_steps = 200;
  sched.steps_per_level = 1;
  sched.gamma_end = 1e18;  // guaranteed blow-up

  try {
    langevin_posterior_sample(mix, chan, y, sched, 1);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step >= 0);
    CHECK(e.step < 200);
  }
}
