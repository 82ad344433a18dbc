#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fairrec/model.hpp"
#include "fairrec/posterior.hpp"

namespace fairrec {

/*
 * Joint law of (reconstructed group, true group):
 *   J(i, j) = Pr(reconstruction in c_i, truth in c_j)
 *           = sum_y Pr(xhat in c_i | y) * Pr(truth in c_j, y).
 * truth_mass[j] = Pr(truth in c_j). For overlapping collections the entries
 * are reported raw and need not sum to one.
 */
struct JointGroupMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd joint;       // rows: reconstructed group, cols: true group
  Eigen::VectorXd truth_mass;
  Eigen::VectorXd recon_mass;  // Pr(reconstruction in c_i); equals row sums
                               // of `joint` when the collection partitions
};

// Enumerates over symbols; the kernel's assumed prior may differ from the
// truth model's. Symbols unreachable under the truth prior contribute zero;
// a symbol reachable under truth but not under the kernel's assumed prior
// raises UnreachableMeasurementError.
JointGroupMatrix joint_group_matrix(const DiscreteModel& truth,
                                    const DiscreteChannel& channel,
                                    const ReconstructionKernel& kernel,
                                    const GroupCollection& groups);

struct RdpReport {
  Eigen::VectorXd alpha;  // alpha_i = Pr(xhat in c_i | truth in c_i)
  double gap = 0.0;       // max_i alpha_i - min_i alpha_i
};

// Throws PreconditionError for a zero-mass group.
RdpReport rdp_vector(const JointGroupMatrix& jgm);

struct PrReport {
  Eigen::VectorXd per_group;  // |Pr(xhat in c_i) - Pr(truth in c_i)|
  double max_gap = 0.0;
};

PrReport pr_gap(const JointGroupMatrix& jgm);

struct CprReport {
  std::vector<double> per_symbol;  // gap at each reachable symbol, NaN if skipped
  double sup_gap = 0.0;
  std::vector<int> skipped;        // symbols with zero truth probability
};

// Worst per-symbol group-mass discrepancy between the kernel's conditional
// law and the truth posterior.
CprReport cpr_gap(const DiscreteModel& truth, const DiscreteChannel& channel,
                  const ReconstructionKernel& kernel, const GroupCollection& groups);

// max |J - J^T| off-diagonal; zero for a single group.
double spe_gap(const JointGroupMatrix& jgm);

/*
 * Reconstruction cross entropy for a partition: the expected negative log
 * probability that the kernel reconstructs into the truth's group,
 *   -E_{truth, y} log Pr(xhat in U(truth) | y).
 * Returns +infinity when some positive-probability pair has a zero kernel
 * group mass.
 */
double rce(const DiscreteModel& truth, const DiscreteChannel& channel,
           const ReconstructionKernel& kernel, const GroupCollection& partition);

struct RceDecomposition {
  double conditional_entropy = 0.0;  // entropy of the truth's group given y
  double kl = 0.0;                   // mean KL(truth group law || kernel group law)
  double total = 0.0;                // conditional_entropy + kl
};

RceDecomposition rce_decomposition(const DiscreteModel& truth,
                                   const DiscreteChannel& channel,
                                   const ReconstructionKernel& kernel,
                                   const GroupCollection& partition);

struct MetricsReport {
  std::vector<std::string> group_names;
  JointGroupMatrix joint;
  RdpReport rdp;
  PrReport pr;
  std::optional<CprReport> cpr;           // absent for empirical estimates
  double spe = 0.0;
  std::optional<double> rce_value;        // partitions only
  std::optional<RceDecomposition> rce_parts;
};

MetricsReport compute_metrics(const DiscreteModel& truth, const DiscreteChannel& channel,
                              const ReconstructionKernel& kernel,
                              const GroupCollection& groups);

// One audited draw, reduced to group indices.
struct GroupSample {
  int truth_group = -1;
  int symbol = -1;
  int recon_group = -1;
};

// Plug-in estimates from samples. CPR is omitted. Groups with zero empirical
// truth mass get alpha = NaN and are excluded from the gap.
MetricsReport empirical_metrics(const std::vector<GroupSample>& samples,
                                const std::vector<std::string>& group_names);

// Same estimates from a pre-tabulated count table, rows = true group,
// columns = reconstructed group.
MetricsReport empirical_from_counts(const Eigen::MatrixXd& counts_truth_by_recon,
                                    const std::vector<std::string>& group_names);

// CSV with rows = true group, columns = reconstructed group.
void write_confusion_csv(std::ostream& os, const JointGroupMatrix& jgm);

}  // namespace fairrec
