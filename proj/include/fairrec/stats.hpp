#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fairrec/model.hpp"
#include "fairrec/posterior.hpp"

namespace fairrec {

// log Pr(X = k) for X ~ Binomial(n, p), computed with lgamma.
double log_binomial_pmf(long long n, long long k, double p);

// Pr(X <= k), exact tail summation (no normal approximation).
double binomial_cdf(long long n, long long k, double p);

// Exact two-sided test of rate 1/2 from k successes in n trials:
//   p = min(1, 2 * min(Pr(X <= k), Pr(X >= k))).
double binomial_two_sided_p_half(long long k, long long n);

struct ClopperPearsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// Exact (conservative) two-sided interval for a binomial rate, by bisection
// on the exact cdf. k = 0 pins low to 0, k = n pins high to 1.
ClopperPearsonInterval clopper_pearson(long long k, long long n, double confidence);

struct BinomialTestResult {
  long long count_ij = 0;  // draws with truth in c_i and reconstruction in c_j
  long long count_ji = 0;
  double p_value = 1.0;
  double estimate = 0.0;  // count_ij / total; NaN when indeterminate
  ClopperPearsonInterval ci;
  bool reject = false;         // p_value < significance
  bool indeterminate = false;  // both counts zero, test carries no information
  double significance = 0.05;
};

/*
 * Tests the symmetry Pr(truth in c_i, recon in c_j) = Pr(truth in c_j,
 * recon in c_i). Conditional on the discordant total, count_ij is
 * Binomial(total, 1/2) under the null, so the test is exact at every sample
 * size. The interval is Clopper-Pearson at confidence 1 - significance.
 */
BinomialTestResult spe_binomial_test(long long count_ij, long long count_ji,
                                     double significance = 0.05);

struct AuditPair {
  int group_i = 0;
  int group_j = 0;
  BinomialTestResult test;
};

struct AuditReport {
  std::vector<std::string> group_names;
  Eigen::MatrixXd counts;  // counts(i, j) = draws with truth group i, recon group j
  long long samples = 0;
  double significance = 0.05;
  std::vector<AuditPair> pairs;  // one test per unordered group pair, i < j
  bool any_reject = false;
  // each pair is tested at the nominal level; past a handful of pairs the
  // family-wise error is larger than that level
  bool multiple_testing_warning = false;
};

// Pairwise symmetry tests from a tabulated count matrix, rows = true group,
// columns = reconstructed group. Entries must be nonnegative integers.
AuditReport audit_from_counts(const Eigen::MatrixXd& counts,
                              const std::vector<std::string>& group_names,
                              double significance = 0.05);

/*
 * Draws `samples` iid (truth, symbol, reconstruction) triples from the model,
 * channel and kernel, tabulates group counts and audits them. Draws are
 * generated in fixed blocks whose rng depends only on (seed, block index), so
 * the report is identical for any worker count. The kernel must be one of the
 * discrete variants.
 */
AuditReport simulate_audit(const DiscreteModel& truth, const DiscreteChannel& channel,
                           const ReconstructionKernel& kernel,
                           const GroupCollection& partition, long long samples,
                           std::uint64_t seed, double significance = 0.05);

}  // namespace fairrec
