#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "fairrec/errors.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/model.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/stats.hpp"

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

GroupCollection catdog_groups() {
  GroupCollection gc;
  gc.groups = {Group{"cats", {0}}, Group{"dogs", {1}}};
  return gc;
}

}  // namespace

TEST_CASE("binomial pmf and cdf match closed-form references") {
  CHECK(std::exp(log_binomial_pmf(12, 3, 0.25)) ==
        doctest::Approx(0.258103609085083).epsilon(1e-12));
  CHECK(binomial_cdf(10, 7, 0.3) == doctest::Approx(0.9984096136).epsilon(1e-12));
  CHECK(binomial_cdf(1000, 400, 0.42) ==
        doctest::Approx(0.1055745152907313).epsilon(1e-11));
  // degenerate cases stay exact
  CHECK(binomial_cdf(10, 10, 0.37) == 1.0);
  CHECK(binomial_cdf(10, -1, 0.37) == 0.0);
  CHECK(std::exp(log_binomial_pmf(5, 0, 0.0)) == 1.0);
  CHECK(std::exp(log_binomial_pmf(5, 5, 1.0)) == 1.0);
  CHECK(log_binomial_pmf(5, 2, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(log_binomial_pmf(4, 5, 0.5), ValidationError);
  CHECK_THROWS_AS(binomial_cdf(10, 3, 1.5), ValidationError);
}

TEST_CASE("two-sided exact test of a fair rate") {
  // doubling the smaller tail, capped at one
  CHECK(binomial_two_sided_p_half(0, 7) == doctest::Approx(0.015625).epsilon(1e-15));
  CHECK(binomial_two_sided_p_half(7, 7) == doctest::Approx(0.015625).epsilon(1e-15));
  CHECK(binomial_two_sided_p_half(4, 9) == 1.0);
  CHECK(binomial_two_sided_p_half(113, 171) ==
        doctest::Approx(3.14075178617923e-05).epsilon(1e-9));
  CHECK(binomial_two_sided_p_half(102, 208) ==
        doctest::Approx(0.8352818537973663).epsilon(1e-9));
  // symmetry in k <-> n - k
  for (long long n : {5LL, 12LL, 31LL}) {
    for (long long k = 0; k <= n; ++k) {
      CHECK(binomial_two_sided_p_half(k, n) ==
            doctest::Approx(binomial_two_sided_p_half(n - k, n)).epsilon(1e-13));
    }
  }
}

TEST_CASE("clopper-pearson interval endpoints and invariants") {
  const ClopperPearsonInterval ci = clopper_pearson(4, 13, 0.99);
  CHECK(ci.low == doctest::Approx(0.05707595701974865).epsilon(1e-9));
  CHECK(ci.high == doctest::Approx(0.691276622852247).epsilon(1e-9));
  const ClopperPearsonInterval ci9 = clopper_pearson(4, 9, 0.99);
  CHECK(ci9.low == doctest::Approx(0.08678765677387971).epsilon(1e-9));
  CHECK(ci9.high == doctest::Approx(0.8539437756649858).epsilon(1e-9));

  CHECK(clopper_pearson(0, 20, 0.95).low == 0.0);
  CHECK(clopper_pearson(20, 20, 0.95).high == 1.0);
  for (long long k = 0; k <= 25; ++k) {
    const ClopperPearsonInterval c = clopper_pearson(k, 25, 0.95);
    CHECK(c.low <= static_cast<double>(k) / 25.0 + 1e-12);
    CHECK(c.high >= static_cast<double>(k) / 25.0 - 1e-12);
    CHECK(c.low >= 0.0);
    CHECK(c.high <= 1.0);
  }
  CHECK_THROWS_AS(clopper_pearson(0, 0, 0.95), ValidationError);
  CHECK_THROWS_AS(clopper_pearson(1, 5, 1.0), ValidationError);
}

TEST_CASE("clopper-pearson coverage is at least nominal") {
  const long long n = 40;
  std::vector<ClopperPearsonInterval> cis;
  for (long long k = 0; k <= n; ++k) cis.push_back(clopper_pearson(k, n, 0.95));

  // exact coverage by enumeration over outcomes
  for (double p : {0.05, 0.3, 0.5}) {
    double coverage = 0.0;
    for (long long k = 0; k <= n; ++k) {
      if (cis[static_cast<size_t>(k)].low <= p && p <= cis[static_cast<size_t>(k)].high) {
        coverage += std::exp(log_binomial_pmf(n, k, p));
      }
    }
    CHECK(coverage >= 0.95);
  }

  // and a monte carlo replication study against the memoized intervals
  Rng rng(424242);
  const double p = 0.3;
  int covered = 0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    long long k = 0;
    for (long long t = 0; t < n; ++t) k += rng.uniform() < p ? 1 : 0;
    const ClopperPearsonInterval& c = cis[static_cast<size_t>(k)];
    covered += (c.low <= p && p <= c.high) ? 1 : 0;
  }
  CHECK(static_cast<double>(covered) / reps >= 0.94);
}

TEST_CASE("exchange symmetry test on fixed counts") {
  SUBCASE("clear asymmetry is rejected") {
    const BinomialTestResult r = spe_binomial_test(113, 58);
    CHECK(r.p_value == doctest::Approx(3.14075178617923e-05).epsilon(1e-9));
    CHECK(r.reject);
    CHECK_FALSE(r.indeterminate);
    CHECK(r.estimate == doctest::Approx(113.0 / 171.0).epsilon(1e-14));
    CHECK(r.ci.low == doctest::Approx(0.5846114599029275).epsilon(1e-9));
    CHECK(r.ci.high == doctest::Approx(0.7313405646483266).epsilon(1e-9));
    CHECK(r.ci.low > 0.5);  // interval excludes the null rate
  }
  SUBCASE("balanced counts are not rejected") {
    const BinomialTestResult r = spe_binomial_test(102, 106);
    CHECK(r.p_value == doctest::Approx(0.8352818537973663).epsilon(1e-9));
    CHECK_FALSE(r.reject);
    CHECK(r.ci.low < 0.5);
    CHECK(r.ci.high > 0.5);
  }
  SUBCASE("no discordant draws is indeterminate") {
    const BinomialTestResult r = spe_binomial_test(0, 0);
    CHECK(r.indeterminate);
    CHECK_FALSE(r.reject);
    CHECK(r.p_value == 1.0);
    CHECK(std::isnan(r.estimate));
  }
  SUBCASE("rejection tracks the significance level") {
    for (long long k : {9LL, 12LL, 15LL}) {
      const BinomialTestResult r = spe_binomial_test(k, 3, 0.05);
      CHECK(r.reject == (r.p_value < 0.05));
    }
    const BinomialTestResult strict = spe_binomial_test(113, 58, 1e-6);
    CHECK_FALSE(strict.reject);  // p is 3e-5, above the stricter level
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(spe_binomial_test(-1, 3), ValidationError);
    CHECK_THROWS_AS(spe_binomial_test(1, 3, 0.0), ValidationError);
  }
}

TEST_CASE("auditing a tabulated count matrix") {
  SUBCASE("two groups, one pair, no multiplicity warning") {
    Eigen::Matrix2d counts;
    counts << 0, 113, 58, 0;
    const AuditReport rep = audit_from_counts(counts, {"a", "b"});
    REQUIRE(rep.pairs.size() == 1);
    CHECK(rep.pairs[0].group_i == 0);
    CHECK(rep.pairs[0].group_j == 1);
    CHECK(rep.pairs[0].test.count_ij == 113);
    CHECK(rep.pairs[0].test.count_ji == 58);
    CHECK(rep.pairs[0].test.reject);
    CHECK(rep.any_reject);
    CHECK_FALSE(rep.multiple_testing_warning);
    CHECK(rep.samples == 171);
  }
  SUBCASE("six pairs trip the multiplicity warning") {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Constant(4, 4, 3.0);
    const AuditReport rep = audit_from_counts(counts, {"a", "b", "c", "d"});
    CHECK(rep.pairs.size() == 6);
    CHECK(rep.multiple_testing_warning);
    CHECK_FALSE(rep.any_reject);
  }
  SUBCASE("three groups stay quiet") {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Constant(3, 3, 2.0);
    const AuditReport rep = audit_from_counts(counts, {"a", "b", "c"});
    CHECK(rep.pairs.size() == 3);
    CHECK_FALSE(rep.multiple_testing_warning);
  }
  SUBCASE("bad tables throw") {
    Eigen::MatrixXd wide(2, 3);
    wide.setZero();
    CHECK_THROWS_AS(audit_from_counts(wide, {}), ValidationError);
    Eigen::Matrix2d negative;
    negative << 1, -2, 0, 4;
    CHECK_THROWS_AS(audit_from_counts(negative, {}), ValidationError);
    Eigen::Matrix2d fractional;
    fractional << 1, 2.5, 0, 4;
    CHECK_THROWS_AS(audit_from_counts(fractional, {}), ValidationError);
    Eigen::Matrix2d fine;
    fine << 1, 2, 0, 4;
    CHECK_THROWS_AS(audit_from_counts(fine, {"only_one"}), ValidationError);
  }
}

TEST_CASE("simulated audit of the exact sampler is reproducible") {
  const AuditReport rep =
      simulate_audit(catdog_model(), catdog_channel(),
                     ExactPosteriorKernel{catdog_model()}, catdog_groups(), 100000, 7);
  CHECK(rep.counts(0, 1) == 14643.0);
  CHECK(rep.counts(1, 0) == 14845.0);
  REQUIRE(rep.pairs.size() == 1);
  CHECK(rep.pairs[0].test.p_value ==
        doctest::Approx(0.24179717507213561).epsilon(1e-12));
  CHECK_FALSE(rep.any_reject);

  // identical counts on a repeated run and under different worker settings
  const AuditReport again =
      simulate_audit(catdog_model(), catdog_channel(),
                     ExactPosteriorKernel{catdog_model()}, catdog_groups(), 100000, 7);
  CHECK((rep.counts - again.counts).cwiseAbs().maxCoeff() == 0.0);

  setenv("FAIRREC_THREADS", "1", 1);
  const AuditReport serial =
      simulate_audit(catdog_model(), catdog_channel(),
                     ExactPosteriorKernel{catdog_model()}, catdog_groups(), 100000, 7);
  setenv("FAIRREC_THREADS", "4", 1);
  const AuditReport wide =
      simulate_audit(catdog_model(), catdog_channel(),
                     ExactPosteriorKernel{catdog_model()}, catdog_groups(), 100000, 7);
  unsetenv("FAIRREC_THREADS");
  CHECK((rep.counts - serial.counts).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rep.counts - wide.counts).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact sampler passes the audit at roughly the nominal rate") {
  int fail_to_reject = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const AuditReport rep =
        simulate_audit(catdog_model(), catdog_channel(),
                       ExactPosteriorKernel{catdog_model()}, catdog_groups(), 100000, seed);
    if (!rep.any_reject) ++fail_to_reject;
  }
  // nominal false-alarm rate is 5 percent; leave room for seed luck
  CHECK(fail_to_reject >= 88);
}

TEST_CASE("constant reconstruction fails the audit immediately") {
  const AuditReport rep =
      simulate_audit(catdog_model(), catdog_channel(),
                     MapBaselineKernel{catdog_model()}, catdog_groups(), 10000, 3);
  CHECK(rep.counts(1, 0) == 0.0);  // never reconstructs into the minority
  CHECK(rep.counts(0, 1) > 1000.0);
  CHECK(rep.any_reject);
  REQUIRE(rep.pairs.size() == 1);
  CHECK(rep.pairs[0].test.p_value < 1e-100);
}

TEST_CASE("audit counts concentrate on the analytic joint law") {
  const long long n = 1000000;
  const AuditReport rep =
      simulate_audit(catdog_model(), catdog_channel(),
                     ExactPosteriorKernel{catdog_model()}, catdog_groups(), n, 19);
  const JointGroupMatrix jgm =
      joint_group_matrix(catdog_model(), catdog_channel(),
                         ExactPosteriorKernel{catdog_model()}, catdog_groups());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double p = jgm.joint(j, i);  // audit rows are truth, joint rows are recon
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      CHECK(std::abs(rep.counts(i, j) / static_cast<double>(n) - p) <= 4.0 * se);
    }
  }
}

TEST_CASE("simulated audit validates its inputs") {
  CHECK_THROWS_AS(simulate_audit(catdog_model(), catdog_channel(),
                                 ExactPosteriorKernel{catdog_model()}, catdog_groups(),
                                 0, 1),
                  ValidationError);
  GroupCollection overlap;
  overlap.groups = {Group{"A", {0, 1}}, Group{"B", {1}}};
  CHECK_THROWS_AS(simulate_audit(catdog_model(), catdog_channel(),
                                 ExactPosteriorKernel{catdog_model()}, overlap, 10, 1),
                  PreconditionError);
}
