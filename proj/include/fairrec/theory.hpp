#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairrec/model.hpp"

namespace fairrec {

/*
 * Checkers for symmetry of the mismatched reconstruction joint
 *   q(U, V) = Pr(truth in U, reconstruction in V)
 * when data follows R but the sampler's prior is P. Exact enumeration
 * throughout; each checker reports the bound it verifies.
 */

// Evenly spaced 1-D state space: cell i sits at origin + i * spacing.
struct Grid1D {
  int cells = 0;
  double spacing = 1.0;
  double origin = 0.0;

  double position(int i) const { return origin + spacing * i; }
};

// Inclusive cell-index interval [lo, hi].
struct CellInterval {
  int lo = 0;
  int hi = 0;
};

// Joint law over (data cell, sampler cell) moving R onto P with bounded
// displacement: every mass-carrying pair must satisfy |pos_i - pos_j| <= epsilon.
struct Coupling {
  Eigen::MatrixXd mass;
  double epsilon = 0.0;
};

// Throws PreconditionError when marginals disagree with (R, P) beyond 1e-12
// or some mass sits on a pair displaced further than epsilon.
void check_coupling(const Coupling& coupling, const Eigen::VectorXd& R,
                    const Eigen::VectorXd& P, const Grid1D& grid);

struct MismatchedJoint {
  double q_uv = 0.0;  // Pr(truth in U, reconstruction in V)
  double q_vu = 0.0;
};

// x* ~ R, y ~ channel(x*), xhat ~ posterior under P given y.
MismatchedJoint mismatched_joint(const Eigen::VectorXd& R, const Eigen::VectorXd& P,
                                 const DiscreteChannel& channel,
                                 const std::vector<int>& U, const std::vector<int>& V);

struct TvBoundTrial {
  std::vector<int> U, V;
  double diff = 0.0;   // |q_uv - q_vu|
  double bound = 0.0;  // 2 * TV(R, P)
};

struct TvBoundReport {
  double tv = 0.0;
  int trials = 0;
  double worst_ratio = 0.0;  // max diff / bound; 0 when TV = 0 (exact symmetry)
  bool tv_zero = false;
  TvBoundTrial worst;
  bool holds = true;  // every trial satisfied diff <= bound (+1e-12)
};

// Draws `trials` random set pairs (U, V) and checks |q_uv - q_vu| <= 2 TV(R, P).
TvBoundReport check_tv_spe_bound(const Eigen::VectorXd& R, const Eigen::VectorXd& P,
                                 const DiscreteChannel& channel, int trials,
                                 std::uint64_t seed);

struct WinfBoundReport {
  double q_uv = 0.0, q_vu = 0.0;
  double channel_tv_max = 0.0;   // worst channel TV across coupled pairs
  double boundary_r_u = 0.0;     // R(U + B_2eps \ U)
  double boundary_r_v = 0.0;     // R(V + B_2eps \ V)
  double boundary_p_u = 0.0;     // P(U + B_eps \ U)
  double boundary_p_v = 0.0;     // P(V + B_eps \ V)
  double delta_eff = 0.0;        // max of the five quantities above
  double bound = 0.0;            // 4 * delta_eff
  bool holds = false;            // |q_uv - q_vu| <= bound (+1e-12)
  bool target_exceeded = false;  // set when delta_eff > delta_target (if given)
};

/*
 * Checks |q_uv - q_vu| <= 4 * delta_eff on a 1-D grid, where delta_eff is
 * the largest of: channel TV over coupled pairs, the 2-epsilon-thickened
 * boundary mass of U and V under R, and the epsilon-thickened boundary mass
 * of U and V under P. Minkowski thickening uses closed balls in grid
 * distance. delta_target, when supplied, only sets the diagnostic flag.
 */
WinfBoundReport check_winf_spe_bound(const Eigen::VectorXd& R, const Eigen::VectorXd& P,
                                     const Grid1D& grid, const Coupling& coupling,
                                     const DiscreteChannel& channel,
                                     const CellInterval& U, const CellInterval& V,
                                     std::optional<double> delta_target = std::nullopt);

struct InfeasibilityOptions {
  int multistarts = 20;
  int iterations = 4000;
  double grid_resolution = 0.01;
  // certification enumerates every kernel on the grid; skipped (certified =
  // false) when the grid would exceed this many points
  double max_grid_points = 5e8;
  std::uint64_t seed = 0;
};

struct InfeasibilityReport {
  double min_found = 0.0;        // best objective over the optimizer runs
  Eigen::MatrixXd kernel;        // attaining kernel, rows(y, x)
  bool certified = false;        // exhaustive grid ran
  double grid_min = 0.0;         // minimum over the grid, when certified
};

/*
 * Minimum over stochastic reconstruction kernels of
 *   max(accuracy gap on `coarse`, accuracy gap on `fine`),
 * the joint violation of equal per-group accuracy on both collections.
 * The objective is a max of linear functionals of the kernel, so projected
 * subgradient descent converges; the grid pass lower-bounds it exhaustively.
 * A zero minimum is attainable iff some kernel recovers both collections'
 * groups at equal rates, which for a two-block split of a group forces the
 * matched alpha to satisfy alpha * q_12 + (1 - alpha) * q_21 = 0, i.e. the
 * kernel never confuses the two blocks.
 */
InfeasibilityReport oblivious_rdp_infeasibility(const DiscreteModel& model,
                                                const DiscreteChannel& channel,
                                                const GroupCollection& coarse,
                                                const GroupCollection& fine,
                                                const InfeasibilityOptions& options = {});

struct FrontierPoint {
  double rdp = 0.0;
  double pr = 0.0;
};

struct FrontierReport {
  std::vector<FrontierPoint> pareto;  // non-dominated (rdp, pr) pairs, rdp ascending
  // worst-case lower bound (1 - alpha) * (majority - minority mass) over
  // near-equal-accuracy kernels
  double threshold = 0.0;
  double rdp_cut = 0.0;
  double min_pr_given_rdp_below = 0.0;  // min pr gap among kernels with rdp < rdp_cut
  bool exclusion_holds = false;         // min_pr_given_rdp_below >= pr_cut
  double pr_cut = 0.0;
};

/*
 * Exhaustive kernel sweep for a two-group partition whose majority group has
 * mass > 1/2. Tabulates the attainable (rdp gap, pr gap) region at the given
 * resolution and checks that no kernel is simultaneously below rdp_cut and
 * pr_cut. Requires at most three measurement symbols.
 */
FrontierReport rdp_pr_frontier(const DiscreteModel& model, const DiscreteChannel& channel,
                               const GroupCollection& partition, double resolution,
                               double rdp_cut, double pr_cut);

// Fixture builders for the 1-D grid checks.

// Density of N(mean, stddev^2) sampled at cell centers and renormalized;
// the final `zero_tail_cells` cells are cleared first so a right shift stays
// on the grid.
Eigen::VectorXd grid_gaussian(const Grid1D& grid, double mean, double stddev,
                              int zero_tail_cells = 0);

// shifted(R, c)[i] = R[i - c]; mass may not fall off either end.
Eigen::VectorXd shifted(const Eigen::VectorXd& R, int shift_cells);

// Deterministic coupling moving cell i to cell i + shift; epsilon = |shift| * spacing.
Coupling shift_coupling(const Eigen::VectorXd& R, int shift_cells, const Grid1D& grid);

/*
 * Channel that quantizes the grid position to its block center and observes
 * it through Gaussian noise, discretized into `bins` intervals (outer bins
 * absorb the tails, so rows are exactly stochastic). States within one block
 * are indistinguishable; adjacent blocks are confusable once sigma is
 * comparable to the block width.
 */
DiscreteChannel block_gaussian_channel(const Grid1D& grid, int blocks, double sigma,
                                       int bins);

}  // namespace fairrec
