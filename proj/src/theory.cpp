#include "fairrec/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fairrec/errors.hpp"
#include "fairrec/rng.hpp"

namespace fairrec {

namespace {

double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void check_distribution_arg(const Eigen::VectorXd& p, const char* name) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
      throw ValidationError(std::string(name) + ": entries must be nonnegative");
    }
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) {
    throw ValidationError(std::string(name) + ": mass must sum to 1");
  }
}

// assumes validated inputs; truth ~ R, measurement ~ channel, reconstruction ~
// exact posterior computed under the mismatched prior P
MismatchedJoint mismatched_joint_impl(const Eigen::VectorXd& R, const Eigen::VectorXd& P,
                                      const DiscreteChannel& channel,
                                      const std::vector<int>& U, const std::vector<int>& V) {
  const int ny = channel.num_symbols();
  MismatchedJoint out;
  for (int y = 0; y < ny; ++y) {
    const Eigen::VectorXd col = channel.rows.col(y);
    const double psi_p = P.dot(col);
    double phi_u = 0.0, phi_v = 0.0;
    for (int s : U) phi_u += R[s] * col[s];
    for (int s : V) phi_v += R[s] * col[s];
    if (!(psi_p > 0.0)) {
      if (phi_u > 0.0 || phi_v > 0.0) {
        throw UnreachableMeasurementError(
            "mismatched_joint: symbol " + std::to_string(y) +
            " is reachable under R but impossible under P");
      }
      continue;
    }
    double p_u = 0.0, p_v = 0.0;
    for (int s : U) p_u += P[s] * col[s];
    for (int s : V) p_v += P[s] * col[s];
    out.q_uv += phi_u * (p_v / psi_p);
    out.q_vu += phi_v * (p_u / psi_p);
  }
  return out;
}

}  // namespace

void check_coupling(const Coupling& coupling, const Eigen::VectorXd& R,
                    const Eigen::VectorXd& P, const Grid1D& grid) {
  const int n = grid.cells;
  if (coupling.mass.rows() != n || coupling.mass.cols() != n ||
      R.size() != n || P.size() != n) {
    throw ValidationError("check_coupling: dimension mismatch with grid");
  }
  if (coupling.epsilon < 0.0) throw ValidationError("check_coupling: negative epsilon");
  const Eigen::VectorXd rowm = coupling.mass.rowwise().sum();
  const Eigen::VectorXd colm = coupling.mass.colwise().sum().transpose();
  if ((rowm - R).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("check_coupling: first marginal does not match R");
  }
  if ((colm - P).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("check_coupling: second marginal does not match P");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (coupling.mass(i, j) > 0.0 &&
          std::abs(grid.position(i) - grid.position(j)) > coupling.epsilon + 1e-12) {
        throw PreconditionError("check_coupling: mass on a pair displaced beyond epsilon");
      }
    }
  }
}

MismatchedJoint mismatched_joint(const Eigen::VectorXd& R, const Eigen::VectorXd& P,
                                 const DiscreteChannel& channel,
                                 const std::vector<int>& U, const std::vector<int>& V) {
  if (R.size() != P.size() || R.size() != channel.rows.rows()) {
    throw ValidationError("mismatched_joint: R, P and channel must share the state space");
  }
  check_distribution_arg(R, "mismatched_joint R");
  check_distribution_arg(P, "mismatched_joint P");
  const int n = static_cast<int>(R.size());
  for (const auto* S : {&U, &V}) {
    for (int s : *S) {
      if (s < 0 || s >= n) throw ValidationError("mismatched_joint: set index out of range");
    }
  }
  return mismatched_joint_impl(R, P, channel, U, V);
}

TvBoundReport check_tv_spe_bound(const Eigen::VectorXd& R, const Eigen::VectorXd& P,
                                 const DiscreteChannel& channel, int trials,
                                 std::uint64_t seed) {
  if (trials < 1) throw ValidationError("check_tv_spe_bound: trials must be >= 1");
  if (R.size() != P.size() || R.size() != channel.rows.rows()) {
    throw ValidationError("check_tv_spe_bound: dimension mismatch");
  }
  check_distribution_arg(R, "check_tv_spe_bound R");
  check_distribution_arg(P, "check_tv_spe_bound P");

  TvBoundReport rep;
  rep.tv = tv_distance(R, P);
  rep.tv_zero = rep.tv <= 0.0;
  rep.trials = trials;
  const int n = static_cast<int>(R.size());
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    std::vector<int> U, V;
    // independent fair-coin subsets; empty sets are legal, both joints vanish
    for (int s = 0; s < n; ++s) {
      if (rng.uniform() < 0.5) U.push_back(s);
    }
    for (int s = 0; s < n; ++s) {
      if (rng.uniform() < 0.5) V.push_back(s);
    }
    const MismatchedJoint q = mismatched_joint_impl(R, P, channel, U, V);
    const double diff = std::abs(q.q_uv - q.q_vu);
    const double bound = 2.0 * rep.tv;
    if (diff > bound + 1e-12) rep.holds = false;
    const double ratio = rep.tv_zero ? 0.0 : diff / bound;
    if (ratio >= rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst = TvBoundTrial{U, V, diff, bound};
    }
  }
  return rep;
}

namespace {

// mass of the cells within `radius` grid steps of the interval, excluding the
// interval itself; balls are closed
double thickened_boundary_mass(const Eigen::VectorXd& p, const CellInterval& s,
                               int radius, int n) {
  double out = 0.0;
  const int lo = std::max(0, s.lo - radius);
  const int hi = std::min(n - 1, s.hi + radius);
  for (int i = lo; i < s.lo; ++i) out += p[i];
  for (int i = s.hi + 1; i <= hi; ++i) out += p[i];
  return out;
}

std::vector<int> interval_cells(const CellInterval& s) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(s.hi - s.lo + 1));
  for (int i = s.lo; i <= s.hi; ++i) out.push_back(i);
  return out;
}

}  // namespace

WinfBoundReport check_winf_spe_bound(const Eigen::VectorXd& R, const Eigen::VectorXd& P,
                                     const Grid1D& grid, const Coupling& coupling,
                                     const DiscreteChannel& channel,
                                     const CellInterval& U, const CellInterval& V,
                                     std::optional<double> delta_target) {
  const int n = grid.cells;
  if (channel.rows.rows() != n) {
    throw ValidationError("check_winf_spe_bound: channel must cover the grid");
  }
  if (U.lo < 0 || U.hi >= n || U.lo > U.hi || V.lo < 0 || V.hi >= n || V.lo > V.hi) {
    throw ValidationError("check_winf_spe_bound: malformed interval");
  }
  check_distribution_arg(R, "check_winf_spe_bound R");
  check_distribution_arg(P, "check_winf_spe_bound P");
  check_coupling(coupling, R, P, grid);

  WinfBoundReport rep;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && coupling.mass(i, j) > 0.0) {
        rep.channel_tv_max =
            std::max(rep.channel_tv_max,
                     tv_distance(channel.rows.row(i).transpose(),
                                 channel.rows.row(j).transpose()));
      }
    }
  }
  // thickening radii in whole cells; the slack keeps exact multiples of the
  // spacing exact under floating point
  const int r1 = static_cast<int>(std::floor(coupling.epsilon / grid.spacing + 1e-9));
  const int r2 = static_cast<int>(std::floor(2.0 * coupling.epsilon / grid.spacing + 1e-9));
  rep.boundary_r_u = thickened_boundary_mass(R, U, r2, n);
  rep.boundary_r_v = thickened_boundary_mass(R, V, r2, n);
  rep.boundary_p_u = thickened_boundary_mass(P, U, r1, n);
  rep.boundary_p_v = thickened_boundary_mass(P, V, r1, n);
  rep.delta_eff = std::max({rep.channel_tv_max, rep.boundary_r_u, rep.boundary_r_v,
                            rep.boundary_p_u, rep.boundary_p_v});
  rep.bound = 4.0 * rep.delta_eff;

  const MismatchedJoint q =
      mismatched_joint_impl(R, P, channel, interval_cells(U), interval_cells(V));
  rep.q_uv = q.q_uv;
  rep.q_vu = q.q_vu;
  rep.holds = std::abs(q.q_uv - q.q_vu) <= rep.bound + 1e-12;
  if (delta_target) rep.target_exceeded = rep.delta_eff > *delta_target;
  return rep;
}

namespace {

// Per-group accuracy is linear in the kernel:
//   alpha_g(K) = sum_y w_g(y) * K(y, members of g),  w_g(y) = Pr(y | truth in g).
// The joint violation is the max over collections of (max alpha - min alpha),
// a pointwise max of linear functionals, hence convex in K.
struct GapObjective {
  struct Part {
    std::vector<Eigen::VectorXd> w;
    std::vector<const std::vector<int>*> members;
  };
  std::vector<Part> parts;
  int ny = 0;
  int nx = 0;

  Eigen::VectorXd alphas(const Eigen::MatrixXd& K, const Part& p) const {
    Eigen::VectorXd a(static_cast<Eigen::Index>(p.w.size()));
    for (std::size_t g = 0; g < p.w.size(); ++g) {
      double acc = 0.0;
      for (int y = 0; y < ny; ++y) {
        double mass = 0.0;
        for (int s : *p.members[g]) mass += K(y, s);
        acc += p.w[g][y] * mass;
      }
      a[static_cast<Eigen::Index>(g)] = acc;
    }
    return a;
  }

  // value, plus a subgradient of the active piece when grad != nullptr
  double eval(const Eigen::MatrixXd& K, Eigen::MatrixXd* grad) const {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_part = 0;
    Eigen::Index best_hi = 0, best_lo = 0;
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
      const Eigen::VectorXd a = alphas(K, parts[pi]);
      Eigen::Index hi = 0, lo = 0;
      a.maxCoeff(&hi);
      a.minCoeff(&lo);
      const double gap = a[hi] - a[lo];
      if (gap > best) {
        best = gap;
        best_part = pi;
        best_hi = hi;
        best_lo = lo;
      }
    }
    if (grad) {
      grad->setZero(ny, nx);
      const Part& p = parts[best_part];
      const auto hi = static_cast<std::size_t>(best_hi);
      const auto lo = static_cast<std::size_t>(best_lo);
      for (int y = 0; y < ny; ++y) {
        for (int s : *p.members[hi]) (*grad)(y, s) += p.w[hi][y];
        for (int s : *p.members[lo]) (*grad)(y, s) -= p.w[lo][y];
      }
    }
    return best;
  }
};

GapObjective::Part make_part(const DiscreteModel& model, const DiscreteChannel& channel,
                             const GroupCollection& groups) {
  GapObjective::Part part;
  for (const auto& g : groups.groups) {
    double mass = 0.0;
    for (int s : g.members) mass += model.prior[s];
    if (!(mass > 0.0)) {
      throw PreconditionError("oblivious_rdp_infeasibility: zero-mass group '" + g.name +
                              "'");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(channel.num_symbols());
    for (int s : g.members) w += model.prior[s] * channel.rows.row(s).transpose();
    part.w.push_back(w / mass);
    part.members.push_back(&g.members);
  }
  return part;
}

// Euclidean projection of one kernel row onto the probability simplex.
void project_row_to_simplex(Eigen::MatrixXd& K, int row) {
  const int n = static_cast<int>(K.cols());
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = K(row, i);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  for (int i = 0; i < n; ++i) {
    css += u[static_cast<std::size_t>(i)];
    const double t = (css - 1.0) / (i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
  }
  for (int i = 0; i < n; ++i) K(row, i) = std::max(0.0, K(row, i) - theta);
}

// rows of the kernel grid: compositions of `denom` into k nonnegative parts
template <typename Fn>
void for_each_composition(int k, std::vector<int>& buf, int pos, int left, Fn&& fn) {
  if (pos == k - 1) {
    buf[static_cast<std::size_t>(pos)] = left;
    fn(buf);
    return;
  }
  for (int v = 0; v <= left; ++v) {
    buf[static_cast<std::size_t>(pos)] = v;
    for_each_composition(k, buf, pos + 1, left - v, fn);
  }
}

double composition_count(int denom, int k) {
  double out = 1.0;  // C(denom + k - 1, k - 1)
  for (int i = 1; i <= k - 1; ++i) out *= static_cast<double>(denom + i) / i;
  return out;
}

}  // namespace

InfeasibilityReport oblivious_rdp_infeasibility(const DiscreteModel& model,
                                                const DiscreteChannel& channel,
                                                const GroupCollection& coarse,
                                                const GroupCollection& fine,
                                                const InfeasibilityOptions& options) {
  Channel ch = channel;
  require_valid(model, &coarse, &ch);
  require_valid(model, &fine, nullptr);
  if (!coarse.partition(model.num_states()) || !fine.partition(model.num_states())) {
    throw PreconditionError(
        "oblivious_rdp_infeasibility: both group collections must partition the states");
  }
  if (options.multistarts < 1 || options.iterations < 1) {
    throw ValidationError("oblivious_rdp_infeasibility: need >= 1 start and iteration");
  }
  if (!(options.grid_resolution > 0.0) || options.grid_resolution > 1.0) {
    throw ValidationError("oblivious_rdp_infeasibility: grid_resolution must be in (0, 1]");
  }
  const int nx = model.num_states();
  const int ny = channel.num_symbols();

  GapObjective obj;
  obj.ny = ny;
  obj.nx = nx;
  obj.parts.push_back(make_part(model, channel, coarse));
  obj.parts.push_back(make_part(model, channel, fine));

  InfeasibilityReport rep;
  rep.min_found = std::numeric_limits<double>::infinity();

  Rng rng(options.seed);
  Eigen::MatrixXd grad(ny, nx);
  for (int start = 0; start < options.multistarts; ++start) {
    Eigen::MatrixXd K(ny, nx);
    for (int y = 0; y < ny; ++y) {
      double rowsum = 0.0;
      for (int x = 0; x < nx; ++x) {
        K(y, x) = -std::log(std::max(rng.uniform(), 1e-300));
        rowsum += K(y, x);
      }
      K.row(y) /= rowsum;
    }
    for (int it = 0; it < options.iterations; ++it) {
      const double f = obj.eval(K, &grad);
      if (f < rep.min_found) {
        rep.min_found = f;
        rep.kernel = K;
      }
      const double step = 0.5 / std::sqrt(static_cast<double>(it + 1));
      K -= step * grad;
      for (int y = 0; y < ny; ++y) project_row_to_simplex(K, y);
    }
    const double f = obj.eval(K, nullptr);
    if (f < rep.min_found) {
      rep.min_found = f;
      rep.kernel = K;
    }
  }

  const int denom = static_cast<int>(std::lround(1.0 / options.grid_resolution));
  const double points = std::pow(composition_count(denom, nx), ny);
  if (points <= options.max_grid_points) {
    rep.certified = true;
    rep.grid_min = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> rows;
    {
      std::vector<int> buf(static_cast<std::size_t>(nx));
      for_each_composition(nx, buf, 0, denom,
                           [&](const std::vector<int>& b) { rows.push_back(b); });
    }
    const std::size_t nrows = rows.size();
    Eigen::MatrixXd K(ny, nx);
    std::vector<std::size_t> idx(static_cast<std::size_t>(ny), 0);
    while (true) {
      for (int y = 0; y < ny; ++y) {
        const std::vector<int>& r = rows[idx[static_cast<std::size_t>(y)]];
        for (int x = 0; x < nx; ++x) {
          K(y, x) = static_cast<double>(r[static_cast<std::size_t>(x)]) / denom;
        }
      }
      rep.grid_min = std::min(rep.grid_min, obj.eval(K, nullptr));
      int y = 0;
      for (; y < ny; ++y) {
        if (++idx[static_cast<std::size_t>(y)] < nrows) break;
        idx[static_cast<std::size_t>(y)] = 0;
      }
      if (y == ny) break;
    }
  }
  return rep;
}

FrontierReport rdp_pr_frontier(const DiscreteModel& model, const DiscreteChannel& channel,
                               const GroupCollection& partition, double resolution,
                               double rdp_cut, double pr_cut) {
  Channel ch = channel;
  require_valid(model, &partition, &ch);
  if (partition.size() != 2 || !partition.partition(model.num_states())) {
    throw PreconditionError("rdp_pr_frontier: need a two-group partition");
  }
  if (!(resolution > 0.0) || resolution > 1.0) {
    throw ValidationError("rdp_pr_frontier: resolution must be in (0, 1]");
  }
  Eigen::Vector2d mass;
  for (int g = 0; g < 2; ++g) {
    mass[g] = 0.0;
    for (int s : partition.groups[static_cast<std::size_t>(g)].members) {
      mass[g] += model.prior[s];
    }
  }
  const int maj = mass[0] >= mass[1] ? 0 : 1;
  if (!(mass[maj] > 0.5)) {
    throw PreconditionError(
        "rdp_pr_frontier: majority group must carry more than half the mass");
  }
  const int ny = channel.num_symbols();
  if (ny > 3) {
    throw PreconditionError("rdp_pr_frontier: exhaustive sweep limited to <= 3 symbols");
  }

  Eigen::MatrixXd w(2, ny);  // w(g, y) = Pr(y | truth in group g)
  for (int g = 0; g < 2; ++g) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(ny);
    for (int s : partition.groups[static_cast<std::size_t>(g)].members) {
      acc += model.prior[s] * channel.rows.row(s).transpose();
    }
    w.row(g) = (acc / mass[g]).transpose();
  }
  const Eigen::VectorXd psi = channel.rows.transpose() * model.prior;

  FrontierReport rep;
  rep.rdp_cut = rdp_cut;
  rep.pr_cut = pr_cut;
  rep.min_pr_given_rdp_below = std::numeric_limits<double>::infinity();
  rep.threshold = std::numeric_limits<double>::infinity();

  // group-valued kernel, one free number per symbol:
  //   kvec[y] = Pr(reconstruct the majority group | y)
  const int steps = static_cast<int>(std::lround(1.0 / resolution));
  std::vector<FrontierPoint> cloud;
  std::vector<int> idx(static_cast<std::size_t>(ny), 0);
  Eigen::VectorXd kvec(ny);
  const double delta = mass[maj] - mass[1 - maj];
  bool done = false;
  while (!done) {
    for (int y = 0; y < ny; ++y) {
      kvec[y] = static_cast<double>(idx[static_cast<std::size_t>(y)]) / steps;
    }
    const double a_maj = w.row(maj).dot(kvec);
    const double a_min = w.row(1 - maj).dot((1.0 - kvec.array()).matrix());
    const double rdp = std::abs(a_maj - a_min);
    const double pr = std::abs(psi.dot(kvec) - mass[maj]);
    cloud.push_back(FrontierPoint{rdp, pr});
    if (rdp < rdp_cut) {
      rep.min_pr_given_rdp_below = std::min(rep.min_pr_given_rdp_below, pr);
      // floor implied by near-equal accuracies: with alpha the mean accuracy,
      // pr >= (1 - alpha) * delta - rdp / 2
      const double alpha_bar = 0.5 * (a_maj + a_min);
      rep.threshold = std::min(rep.threshold, (1.0 - alpha_bar) * delta);
    }
    int y = 0;
    for (; y < ny; ++y) {
      if (++idx[static_cast<std::size_t>(y)] <= steps) break;
      idx[static_cast<std::size_t>(y)] = 0;
    }
    done = (y == ny);
  }

  std::sort(cloud.begin(), cloud.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    return a.rdp < b.rdp || (a.rdp == b.rdp && a.pr < b.pr);
  });
  double best_pr = std::numeric_limits<double>::infinity();
  for (const auto& p : cloud) {
    if (p.pr < best_pr - 1e-15) {
      rep.pareto.push_back(p);
      best_pr = p.pr;
    }
  }
  rep.exclusion_holds = rep.min_pr_given_rdp_below >= pr_cut;
  return rep;
}

Eigen::VectorXd grid_gaussian(const Grid1D& grid, double mean, double stddev,
                              int zero_tail_cells) {
  if (grid.cells < 1) throw ValidationError("grid_gaussian: empty grid");
  if (!(stddev > 0.0)) throw ValidationError("grid_gaussian: stddev must be positive");
  if (zero_tail_cells < 0 || zero_tail_cells >= grid.cells) {
    throw ValidationError("grid_gaussian: bad zero_tail_cells");
  }
  Eigen::VectorXd p(grid.cells);
  for (int i = 0; i < grid.cells; ++i) {
    const double z = (grid.position(i) - mean) / stddev;
    p[i] = std::exp(-0.5 * z * z);
  }
  for (int i = grid.cells - zero_tail_cells; i < grid.cells; ++i) p[i] = 0.0;
  const double s = p.sum();
  if (!(s > 0.0)) throw PreconditionError("grid_gaussian: no mass left on the grid");
  return p / s;
}

Eigen::VectorXd shifted(const Eigen::VectorXd& R, int shift_cells) {
  const int n = static_cast<int>(R.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const int j = i + shift_cells;
    if (j < 0 || j >= n) {
      if (R[i] > 0.0) throw PreconditionError("shifted: mass would fall off the grid");
      continue;
    }
    out[j] = R[i];
  }
  return out;
}

Coupling shift_coupling(const Eigen::VectorXd& R, int shift_cells, const Grid1D& grid) {
  const int n = static_cast<int>(R.size());
  if (n != grid.cells) throw ValidationError("shift_coupling: grid size mismatch");
  Coupling c;
  c.mass = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (R[i] <= 0.0) continue;
    const int j = i + shift_cells;
    if (j < 0 || j >= n) throw PreconditionError("shift_coupling: mass falls off the grid");
    c.mass(i, j) = R[i];
  }
  c.epsilon = std::abs(shift_cells) * grid.spacing;
  return c;
}

DiscreteChannel block_gaussian_channel(const Grid1D& grid, int blocks, double sigma,
                                       int bins) {
  if (blocks < 1 || grid.cells % blocks != 0) {
    throw ValidationError("block_gaussian_channel: blocks must divide the cell count");
  }
  if (!(sigma > 0.0)) throw ValidationError("block_gaussian_channel: sigma must be positive");
  if (bins < 2) throw ValidationError("block_gaussian_channel: need at least two bins");
  const int per = grid.cells / blocks;
  Eigen::VectorXd centers(blocks);
  for (int b = 0; b < blocks; ++b) {
    double acc = 0.0;
    for (int j = 0; j < per; ++j) acc += grid.position(b * per + j);
    centers[b] = acc / per;
  }
  const double lo = centers.minCoeff() - 5.0 * sigma;
  const double hi = centers.maxCoeff() + 5.0 * sigma;

  DiscreteChannel chan;
  chan.rows.resize(grid.cells, bins);
  chan.symbols.reserve(static_cast<std::size_t>(bins));
  for (int y = 0; y < bins; ++y) chan.symbols.push_back("bin" + std::to_string(y));
  for (int i = 0; i < grid.cells; ++i) {
    const double c = centers[i / per];
    // interior edges evenly spaced on [lo, hi]; the outer bins absorb the
    // tails so each row sums to exactly 1
    double prev = 0.0;
    for (int y = 0; y < bins; ++y) {
      double cur = 1.0;
      if (y < bins - 1) {
        const double edge = lo + (hi - lo) * (y + 1) / static_cast<double>(bins);
        cur = phi_cdf((edge - c) / sigma);
      }
      chan.rows(i, y) = std::max(0.0, cur - prev);
      prev = cur;
    }
  }
  return chan;
}

}  // namespace fairrec
