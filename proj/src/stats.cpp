#include "fairrec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairrec/errors.hpp"
#include "fairrec/parallel.hpp"
#include "fairrec/rng.hpp"

namespace fairrec {

namespace {

void check_kn(long long k, long long n, const char* where) {
  if (n < 0 || k < 0 || k > n) {
    throw ValidationError(std::string(where) + ": need 0 <= k <= n");
  }
}

// sum_{j=lo}^{hi} Pr(X = j) with compensated accumulation
double tail_sum(long long n, long long lo, long long hi, double p) {
  double sum = 0.0, comp = 0.0;
  for (long long j = lo; j <= hi; ++j) {
    const double term = std::exp(log_binomial_pmf(n, j, p));
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace

double log_binomial_pmf(long long n, long long k, double p) {
  check_kn(k, n, "log_binomial_pmf");
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw ValidationError("log_binomial_pmf: p must lie in [0, 1]");
  }
  const double inf = std::numeric_limits<double>::infinity();
  if (p == 0.0) return k == 0 ? 0.0 : -inf;
  if (p == 1.0) return k == n ? 0.0 : -inf;
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  const double lc = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) -
                    std::lgamma(nd - kd + 1.0);
  return lc + kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

double binomial_cdf(long long n, long long k, double p) {
  if (n < 0) throw ValidationError("binomial_cdf: negative n");
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw ValidationError("binomial_cdf: p must lie in [0, 1]");
  }
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  // sum whichever tail is shorter; both are exact term-by-term
  if (k + 1 <= n - k) {
    return std::min(1.0, tail_sum(n, 0, k, p));
  }
  return std::max(0.0, 1.0 - tail_sum(n, k + 1, n, p));
}

double binomial_two_sided_p_half(long long k, long long n) {
  check_kn(k, n, "binomial_two_sided_p_half");
  if (n == 0) return 1.0;
  const double lower = binomial_cdf(n, k, 0.5);
  const double upper = 1.0 - binomial_cdf(n, k - 1, 0.5);
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

ClopperPearsonInterval clopper_pearson(long long k, long long n, double confidence) {
  check_kn(k, n, "clopper_pearson");
  if (n == 0) throw ValidationError("clopper_pearson: need n >= 1");
  if (!(confidence > 0.0) || !(confidence < 1.0)) {
    throw ValidationError("clopper_pearson: confidence must lie in (0, 1)");
  }
  const double a = 0.5 * (1.0 - confidence);
  ClopperPearsonInterval ci;
  if (k > 0) {
    // smallest p with Pr(X >= k | p) = a; the left side grows with p
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (1.0 - binomial_cdf(n, k - 1, mid) < a) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    ci.low = 0.5 * (lo + hi);
  }
  if (k < n) {
    // largest p with Pr(X <= k | p) = a; the left side shrinks as p grows
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (binomial_cdf(n, k, mid) > a) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    ci.high = 0.5 * (lo + hi);
  }
  return ci;
}

BinomialTestResult spe_binomial_test(long long count_ij, long long count_ji,
                                     double significance) {
  if (count_ij < 0 || count_ji < 0) {
    throw ValidationError("spe_binomial_test: counts must be nonnegative");
  }
  if (!(significance > 0.0) || !(significance < 1.0)) {
    throw ValidationError("spe_binomial_test: significance must lie in (0, 1)");
  }
  BinomialTestResult r;
  r.count_ij = count_ij;
  r.count_ji = count_ji;
  r.significance = significance;
  const long long total = count_ij + count_ji;
  if (total == 0) {
    r.indeterminate = true;
    r.estimate = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.p_value = binomial_two_sided_p_half(count_ij, total);
  r.estimate = static_cast<double>(count_ij) / static_cast<double>(total);
  r.ci = clopper_pearson(count_ij, total, 1.0 - significance);
  r.reject = r.p_value < significance;
  return r;
}

AuditReport audit_from_counts(const Eigen::MatrixXd& counts,
                              const std::vector<std::string>& group_names,
                              double significance) {
  const int ng = static_cast<int>(counts.rows());
  if (counts.cols() != ng || ng < 1) {
    throw ValidationError("audit_from_counts: counts must be square and nonempty");
  }
  if (!group_names.empty() && static_cast<int>(group_names.size()) != ng) {
    throw ValidationError("audit_from_counts: group_names size mismatch");
  }
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < ng; ++j) {
      const double v = counts(i, j);
      if (!(v >= 0.0) || std::abs(v - std::llround(v)) > 1e-9) {
        throw ValidationError("audit_from_counts: entries must be nonnegative integers");
      }
    }
  }

  AuditReport rep;
  rep.counts = counts;
  rep.significance = significance;
  rep.samples = static_cast<long long>(std::llround(counts.sum()));
  if (group_names.empty()) {
    for (int g = 0; g < ng; ++g) rep.group_names.push_back("g" + std::to_string(g));
  } else {
    rep.group_names = group_names;
  }
  for (int i = 0; i < ng; ++i) {
    for (int j = i + 1; j < ng; ++j) {
      AuditPair pair;
      pair.group_i = i;
      pair.group_j = j;
      pair.test = spe_binomial_test(std::llround(counts(i, j)),
                                    std::llround(counts(j, i)), significance);
      rep.any_reject = rep.any_reject || pair.test.reject;
      rep.pairs.push_back(std::move(pair));
    }
  }
  rep.multiple_testing_warning = rep.pairs.size() > 5;
  return rep;
}

AuditReport simulate_audit(const DiscreteModel& truth, const DiscreteChannel& channel,
                           const ReconstructionKernel& kernel,
                           const GroupCollection& partition, long long samples,
                           std::uint64_t seed, double significance) {
  Channel ch = channel;
  require_valid(truth, &partition, &ch);
  if (!partition.partition(truth.num_states())) {
    throw PreconditionError("simulate_audit: groups must partition the states");
  }
  if (samples < 1) throw ValidationError("simulate_audit: need samples >= 1");

  const int nx = truth.num_states();
  const int ny = channel.num_symbols();
  const int ng = partition.size();

  std::vector<int> to_group(static_cast<std::size_t>(nx));
  for (int s = 0; s < nx; ++s) {
    to_group[static_cast<std::size_t>(s)] = partition.group_of(s, nx);
  }
  std::vector<Eigen::VectorXd> state_rows(static_cast<std::size_t>(nx));
  for (int s = 0; s < nx; ++s) {
    state_rows[static_cast<std::size_t>(s)] = channel.rows.row(s).transpose();
  }
  // reconstruction group law per reachable symbol, precomputed so the sampling
  // loop cannot throw
  const Eigen::VectorXd psi = channel.rows.transpose() * truth.prior;
  std::vector<Eigen::VectorXd> group_law(static_cast<std::size_t>(ny));
  for (int y = 0; y < ny; ++y) {
    if (!(psi[y] > 0.0)) continue;
    const Eigen::VectorXd law = kernel_conditional(kernel, channel, y);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(ng);
    for (int s = 0; s < nx; ++s) g[to_group[static_cast<std::size_t>(s)]] += law[s];
    group_law[static_cast<std::size_t>(y)] = std::move(g);
  }

  constexpr long long kBlock = 4096;
  const std::size_t nblocks =
      static_cast<std::size_t>((samples + kBlock - 1) / kBlock);
  std::vector<std::vector<long long>> block_counts(
      nblocks, std::vector<long long>(static_cast<std::size_t>(ng * ng), 0));
  parallel_blocks(nblocks, [&](std::size_t b) {
    Rng rng = Rng::substream(seed, b);
    auto& c = block_counts[b];
    const long long lo = static_cast<long long>(b) * kBlock;
    const long long hi = std::min(samples, lo + kBlock);
    for (long long t = lo; t < hi; ++t) {
      const int x = rng.categorical(truth.prior);
      const int y = rng.categorical(state_rows[static_cast<std::size_t>(x)]);
      const int g = rng.categorical(group_law[static_cast<std::size_t>(y)]);
      ++c[static_cast<std::size_t>(to_group[static_cast<std::size_t>(x)] * ng + g)];
    }
  });

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(ng, ng);
  for (const auto& c : block_counts) {
    for (int i = 0; i < ng; ++i) {
      for (int j = 0; j < ng; ++j) {
        counts(i, j) += static_cast<double>(c[static_cast<std::size_t>(i * ng + j)]);
      }
    }
  }
  std::vector<std::string> names;
  names.reserve(partition.groups.size());
  for (const auto& g : partition.groups) names.push_back(g.name);
  AuditReport rep = audit_from_counts(counts, names, significance);
  rep.samples = samples;
  return rep;
}

}  // namespace fairrec
