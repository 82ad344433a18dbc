#include "fairrec/metrics.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "fairrec/errors.hpp"

namespace fairrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Compensated accumulator; keeps symbol-order-insensitive sums accurate
// enough for the 1e-12 identities checked downstream.
struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

Eigen::VectorXd group_mass(const Eigen::VectorXd& per_state, const GroupCollection& groups) {
  Eigen::VectorXd out(groups.size());
  for (int g = 0; g < groups.size(); ++g) {
    Kahan acc;
    for (int s : groups.groups[g].members) acc.add(per_state[s]);
    out[g] = acc.value();
  }
  return out;
}

}  // namespace

JointGroupMatrix joint_group_matrix(const DiscreteModel& truth,
                                    const DiscreteChannel& channel,
                                    const ReconstructionKernel& kernel,
                                    const GroupCollection& groups) {
  Channel ch = channel;
  require_valid(truth, &groups, &ch);
  const int k = groups.size();
  const int ny = channel.num_symbols();

  JointGroupMatrix out;
  out.names.reserve(k);
  for (const auto& g : groups.groups) out.names.push_back(g.name);
  out.truth_mass = group_mass(truth.prior, groups);

  std::vector<std::vector<Kahan>> acc(k, std::vector<Kahan>(k));
  std::vector<Kahan> recon(k);
  for (int y = 0; y < ny; ++y) {
    const Eigen::VectorXd truth_joint = truth.prior.cwiseProduct(channel.rows.col(y));
    const double phi = truth_joint.sum();
    if (!(phi > 0.0)) continue;  // symbol never occurs under truth
    const Eigen::VectorXd t = group_mass(truth_joint, groups);
    const Eigen::VectorXd law = kernel_conditional(kernel, channel, y);
    const Eigen::VectorXd r = group_mass(law, groups);
    for (int i = 0; i < k; ++i) {
      recon[i].add(r[i] * phi);
      for (int j = 0; j < k; ++j) acc[i][j].add(r[i] * t[j]);
    }
  }
  out.joint.resize(k, k);
  out.recon_mass.resize(k);
  for (int i = 0; i < k; ++i) {
    out.recon_mass[i] = recon[i].value();
    for (int j = 0; j < k; ++j) out.joint(i, j) = acc[i][j].value();
  }
  return out;
}

RdpReport rdp_vector(const JointGroupMatrix& jgm) {
  const int k = static_cast<int>(jgm.truth_mass.size());
  RdpReport rep;
  rep.alpha.resize(k);
  for (int i = 0; i < k; ++i) {
    if (!(jgm.truth_mass[i] > 0.0)) {
      throw PreconditionError("rdp_vector: group '" + jgm.names[i] +
                              "' has zero truth mass");
    }
    rep.alpha[i] = jgm.joint(i, i) / jgm.truth_mass[i];
  }
  rep.gap = rep.alpha.maxCoeff() - rep.alpha.minCoeff();
  return rep;
}

PrReport pr_gap(const JointGroupMatrix& jgm) {
  const int k = static_cast<int>(jgm.truth_mass.size());
  PrReport rep;
  rep.per_group.resize(k);
  // recon_mass rather than row sums so overlapping collections stay correct
  for (int i = 0; i < k; ++i) {
    rep.per_group[i] = std::abs(jgm.recon_mass[i] - jgm.truth_mass[i]);
  }
  rep.max_gap = k ? rep.per_group.maxCoeff() : 0.0;
  return rep;
}

CprReport cpr_gap(const DiscreteModel& truth, const DiscreteChannel& channel,
                  const ReconstructionKernel& kernel, const GroupCollection& groups) {
  Channel ch = channel;
  require_valid(truth, &groups, &ch);
  CprReport rep;
  const int ny = channel.num_symbols();
  rep.per_symbol.assign(ny, std::numeric_limits<double>::quiet_NaN());
  for (int y = 0; y < ny; ++y) {
    const double phi = truth.prior.dot(channel.rows.col(y));
    if (!(phi > 0.0)) {
      rep.skipped.push_back(y);
      continue;
    }
    // both sides reduced by the same group-sum so an identical per-state law
    // yields a gap of exactly zero
    const Eigen::VectorXd truth_post = exact_posterior(truth, channel, y);
    const Eigen::VectorXd law = kernel_conditional(kernel, channel, y);
    const Eigen::VectorXd pt = group_mass(truth_post, groups);
    const Eigen::VectorXd pk = group_mass(law, groups);
    rep.per_symbol[y] = (pt - pk).cwiseAbs().maxCoeff();
    rep.sup_gap = std::max(rep.sup_gap, rep.per_symbol[y]);
  }
  return rep;
}

double spe_gap(const JointGroupMatrix& jgm) {
  const int k = static_cast<int>(jgm.joint.rows());
  double gap = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      gap = std::max(gap, std::abs(jgm.joint(i, j) - jgm.joint(j, i)));
    }
  }
  return gap;
}

double rce(const DiscreteModel& truth, const DiscreteChannel& channel,
           const ReconstructionKernel& kernel, const GroupCollection& partition) {
  Channel ch = channel;
  require_valid(truth, &partition, &ch);
  if (!partition.partition(truth.num_states())) {
    throw PreconditionError("rce: group collection must partition the states");
  }
  const int n = truth.num_states();
  const int ny = channel.num_symbols();
  std::vector<int> owner(n);
  for (int s = 0; s < n; ++s) owner[s] = partition.group_of(s, n);

  Kahan total;
  for (int y = 0; y < ny; ++y) {
    const Eigen::VectorXd truth_joint = truth.prior.cwiseProduct(channel.rows.col(y));
    if (!(truth_joint.sum() > 0.0)) continue;
    const Eigen::VectorXd law = kernel_conditional(kernel, channel, y);
    const Eigen::VectorXd mass = group_mass(law, partition);
    for (int s = 0; s < n; ++s) {
      const double p = truth_joint[s];
      if (!(p > 0.0)) continue;
      const double q = mass[owner[s]];
      if (!(q > 0.0)) return kInf;
      total.add(-p * std::log(q));
    }
  }
  return total.value();
}

RceDecomposition rce_decomposition(const DiscreteModel& truth,
                                   const DiscreteChannel& channel,
                                   const ReconstructionKernel& kernel,
                                   const GroupCollection& partition) {
  Channel ch = channel;
  require_valid(truth, &partition, &ch);
  if (!partition.partition(truth.num_states())) {
    throw PreconditionError("rce_decomposition: group collection must partition the states");
  }
  RceDecomposition out;
  Kahan ent, kl;
  bool infinite = false;
  for (int y = 0; y < channel.num_symbols(); ++y) {
    const double phi = truth.prior.dot(channel.rows.col(y));
    if (!(phi > 0.0)) continue;
    const Eigen::VectorXd post = exact_posterior(truth, channel, y);
    const Eigen::VectorXd p = group_mass(post, partition);
    const Eigen::VectorXd law = kernel_conditional(kernel, channel, y);
    const Eigen::VectorXd q = group_mass(law, partition);
    for (int i = 0; i < partition.size(); ++i) {
      if (!(p[i] > 0.0)) continue;
      ent.add(-phi * p[i] * std::log(p[i]));
      if (!(q[i] > 0.0)) {
        infinite = true;
      } else {
        kl.add(phi * p[i] * std::log(p[i] / q[i]));
      }
    }
  }
  out.conditional_entropy = ent.value();
  out.kl = infinite ? kInf : kl.value();
  out.total = out.conditional_entropy + out.kl;
  return out;
}

MetricsReport compute_metrics(const DiscreteModel& truth, const DiscreteChannel& channel,
                              const ReconstructionKernel& kernel,
                              const GroupCollection& groups) {
  MetricsReport rep;
  rep.joint = joint_group_matrix(truth, channel, kernel, groups);
  rep.group_names = rep.joint.names;
  rep.rdp = rdp_vector(rep.joint);
  rep.pr = pr_gap(rep.joint);
  rep.cpr = cpr_gap(truth, channel, kernel, groups);
  rep.spe = spe_gap(rep.joint);
  if (groups.partition(truth.num_states())) {
    rep.rce_value = rce(truth, channel, kernel, groups);
    rep.rce_parts = rce_decomposition(truth, channel, kernel, groups);
  }
  return rep;
}

namespace {

MetricsReport empirical_from_joint(const Eigen::MatrixXd& joint,
                                   const std::vector<std::string>& names) {
  const int k = static_cast<int>(joint.rows());
  MetricsReport rep;
  rep.group_names = names;
  rep.joint.names = names;
  rep.joint.joint = joint;
  rep.joint.truth_mass = joint.colwise().sum();
  rep.joint.recon_mass = joint.rowwise().sum();

  rep.rdp.alpha.resize(k);
  double amax = -kInf, amin = kInf;
  for (int i = 0; i < k; ++i) {
    if (rep.joint.truth_mass[i] > 0.0) {
      rep.rdp.alpha[i] = joint(i, i) / rep.joint.truth_mass[i];
      amax = std::max(amax, rep.rdp.alpha[i]);
      amin = std::min(amin, rep.rdp.alpha[i]);
    } else {
      rep.rdp.alpha[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  rep.rdp.gap = (amax >= amin) ? amax - amin : 0.0;

  rep.pr.per_group.resize(k);
  for (int i = 0; i < k; ++i) {
    rep.pr.per_group[i] = std::abs(rep.joint.recon_mass[i] - rep.joint.truth_mass[i]);
  }
  rep.pr.max_gap = k ? rep.pr.per_group.maxCoeff() : 0.0;
  rep.spe = spe_gap(rep.joint);
  return rep;  // cpr and rce intentionally absent for empirical input
}

}  // namespace

MetricsReport empirical_metrics(const std::vector<GroupSample>& samples,
                                const std::vector<std::string>& group_names) {
  const int k = static_cast<int>(group_names.size());
  if (samples.empty()) throw PreconditionError("empirical_metrics: no samples");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);  // recon x truth
  for (const auto& s : samples) {
    if (s.truth_group < 0 || s.truth_group >= k || s.recon_group < 0 || s.recon_group >= k) {
      throw ValidationError("empirical_metrics: sample group index out of range");
    }
    counts(s.recon_group, s.truth_group) += 1.0;
  }
  return empirical_from_joint(counts / static_cast<double>(samples.size()), group_names);
}

MetricsReport empirical_from_counts(const Eigen::MatrixXd& counts_truth_by_recon,
                                    const std::vector<std::string>& group_names) {
  if (counts_truth_by_recon.rows() != counts_truth_by_recon.cols() ||
      counts_truth_by_recon.rows() != static_cast<Eigen::Index>(group_names.size())) {
    throw ValidationError("empirical_from_counts: table must be square over the groups");
  }
  const double total = counts_truth_by_recon.sum();
  if (!(total > 0.0)) throw PreconditionError("empirical_from_counts: empty table");
  // stored convention is rows = reconstruction, so ingest transposed
  return empirical_from_joint(counts_truth_by_recon.transpose() / total, group_names);
}

void write_confusion_csv(std::ostream& os, const JointGroupMatrix& jgm) {
  os << "truth";
  for (const auto& n : jgm.names) os << "," << n;
  os << "\n";
  os.precision(17);
  const int k = static_cast<int>(jgm.joint.rows());
  for (int j = 0; j < k; ++j) {
    os << jgm.names[j];
    for (int i = 0; i < k; ++i) os << "," << jgm.joint(i, j);
    os << "\n";
  }
}

}  // namespace fairrec
