#include "fairrec/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fairrec/errors.hpp"
#include "fairrec/model.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/scenario.hpp"
#include "fairrec/theory.hpp"

namespace fairrec {

namespace {

using nlohmann::json;

Eigen::VectorXd random_distribution(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

DiscreteChannel random_channel(Rng& rng, int n, int ny) {
  DiscreteChannel chan;
  chan.rows.resize(n, ny);
  for (int x = 0; x < n; ++x) {
    chan.rows.row(x) = random_distribution(rng, ny).transpose();
  }
  for (int y = 0; y < ny; ++y) chan.symbols.push_back("y" + std::to_string(y));
  return chan;
}

std::vector<int> random_subset(Rng& rng, int n) {
  std::vector<int> subset;
  while (subset.empty()) {
    for (int i = 0; i < n; ++i) {
      if (rng.uniform() < 0.5) subset.push_back(i);
    }
  }
  return subset;
}

// Matched priors: the reconstruction joint must be exactly symmetric, up to
// enumeration round-off, for every model and every pair of state sets.
SuiteResult suite_case1(std::uint64_t seed) {
  const int kTrials = 200;
  const double kTol = 1e-12;
  double worst = 0.0;
  json per_trial = json::array();
  for (int t = 0; t < kTrials; ++t) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(t));
    const int n = static_cast<int>(rng.uniform_int(2, 20));
    const int ny = static_cast<int>(rng.uniform_int(2, 20));
    const Eigen::VectorXd prior = random_distribution(rng, n);
    const DiscreteChannel channel = random_channel(rng, n, ny);
    const std::vector<int> U = random_subset(rng, n);
    const std::vector<int> V = random_subset(rng, n);
    const MismatchedJoint q = mismatched_joint(prior, prior, channel, U, V);
    const double asym = std::abs(q.q_uv - q.q_vu);
    worst = std::max(worst, asym);
    per_trial.push_back(
        {{"states", n}, {"symbols", ny}, {"asymmetry", json_number(asym)}});
  }
  SuiteResult res;
  res.pass = worst < kTol;
  res.report = {{"suite", "case1"},         {"seed", seed},
                {"trials", kTrials},        {"max_asymmetry", json_number(worst)},
                {"tolerance", kTol},        {"per_trial", std::move(per_trial)},
                {"pass", res.pass}};
  return res;
}

// Mismatched priors: |q_UV - q_VU| <= 2 TV(R, P) over random models and
// random set pairs.
SuiteResult suite_case2(std::uint64_t seed) {
  const int kConfigs = 50;
  const int kTrialsPerConfig = 20;
  bool all_hold = true;
  double worst_ratio = 0.0;
  json per_config = json::array();
  for (int c = 0; c < kConfigs; ++c) {
    Rng rng = Rng::substream(seed, 1000 + static_cast<std::uint64_t>(c));
    const int n = static_cast<int>(rng.uniform_int(2, 12));
    const int ny = static_cast<int>(rng.uniform_int(2, 12));
    const Eigen::VectorXd R = random_distribution(rng, n);
    const Eigen::VectorXd P = random_distribution(rng, n);
    const DiscreteChannel channel = random_channel(rng, n, ny);
    const TvBoundReport rep =
        check_tv_spe_bound(R, P, channel, kTrialsPerConfig, rng.next_u64());
    all_hold = all_hold && rep.holds;
    worst_ratio = std::max(worst_ratio, rep.worst_ratio);
    per_config.push_back({{"states", n},
                          {"symbols", ny},
                          {"tv", json_number(rep.tv)},
                          {"worst_ratio", json_number(rep.worst_ratio)},
                          {"holds", rep.holds}});
  }
  SuiteResult res;
  res.pass = all_hold;
  res.report = {{"suite", "case2"},
                {"seed", seed},
                {"configs", kConfigs},
                {"trials_total", kConfigs * kTrialsPerConfig},
                {"worst_ratio", json_number(worst_ratio)},
                {"all_hold", all_hold},
                {"per_config", std::move(per_config)},
                {"pass", res.pass}};
  return res;
}

// 1-D grids: Gaussian data law, shifted sampler law joined by the shift
// coupling, block-quantizing Gaussian channel, random cell intervals.
SuiteResult suite_case3(std::uint64_t seed) {
  const int kConfigs = 60;
  bool all_hold = true;
  double worst_ratio = 0.0;
  json per_config = json::array();
  for (int c = 0; c < kConfigs; ++c) {
    Rng rng = Rng::substream(seed, 2000 + static_cast<std::uint64_t>(c));
    const int blocks = static_cast<int>(rng.uniform_int(2, 6));
    const int per_block = static_cast<int>(rng.uniform_int(6, 12));
    const int cells = blocks * per_block;
    const Grid1D grid{cells, 1.0, 0.0};
    const int shift = static_cast<int>(rng.uniform_int(1, 3));
    const double mean = rng.uniform(0.35 * cells, 0.65 * cells);
    const double stddev = rng.uniform(2.0, 6.0);
    const Eigen::VectorXd R = grid_gaussian(grid, mean, stddev, shift);
    const Eigen::VectorXd P = shifted(R, shift);
    const Coupling coupling = shift_coupling(R, shift, grid);
    const double sigma = rng.uniform(0.5, 2.0) * per_block;
    const int bins = static_cast<int>(rng.uniform_int(8, 16));
    const DiscreteChannel channel = block_gaussian_channel(grid, blocks, sigma, bins);
    const int u_lo = static_cast<int>(rng.uniform_int(0, cells - 1));
    const CellInterval U{u_lo, static_cast<int>(rng.uniform_int(u_lo, cells - 1))};
    const int v_lo = static_cast<int>(rng.uniform_int(0, cells - 1));
    const CellInterval V{v_lo, static_cast<int>(rng.uniform_int(v_lo, cells - 1))};
    const WinfBoundReport rep = check_winf_spe_bound(R, P, grid, coupling, channel, U, V);
    const double diff = std::abs(rep.q_uv - rep.q_vu);
    all_hold = all_hold && rep.holds;
    if (rep.bound > 0.0) worst_ratio = std::max(worst_ratio, diff / rep.bound);
    per_config.push_back({{"cells", cells},
                          {"blocks", blocks},
                          {"shift", shift},
                          {"diff", json_number(diff)},
                          {"delta_eff", json_number(rep.delta_eff)},
                          {"bound", json_number(rep.bound)},
                          {"holds", rep.holds}});
  }
  SuiteResult res;
  res.pass = all_hold;
  res.report = {{"suite", "case3"},
                {"seed", seed},
                {"configs", kConfigs},
                {"worst_ratio", json_number(worst_ratio)},
                {"all_hold", all_hold},
                {"per_config", std::move(per_config)},
                {"pass", res.pass}};
  return res;
}

json infeasibility_json(const InfeasibilityReport& rep, double resolution) {
  return {{"min_found", json_number(rep.min_found)},
          {"certified", rep.certified},
          {"grid_min", json_number(rep.grid_min)},
          {"grid_resolution", resolution},
          {"kernel", json_matrix(rep.kernel)}};
}

// Shared-symbol fixture where every kernel violates equal accuracy on the
// coarse or the fine partition; identity and separable channels as controls
// where the certified minimum collapses to zero.
SuiteResult suite_oblivious(std::uint64_t seed) {
  DiscreteModel model;
  model.states = {"a1", "a2", "b"};
  model.prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  GroupCollection coarse;
  coarse.groups = {Group{"A", {0, 1}}, Group{"B", {2}}};
  GroupCollection fine;
  fine.groups = {Group{"a1", {0}}, Group{"a2", {1}}, Group{"b", {2}}};

  DiscreteChannel shared;
  shared.symbols = {"y0"};
  shared.rows = Eigen::MatrixXd::Ones(3, 1);
  InfeasibilityOptions fopt;
  fopt.seed = seed;
  const InfeasibilityReport fixture =
      oblivious_rdp_infeasibility(model, shared, coarse, fine, fopt);
  const bool fixture_pass = fixture.certified && fixture.grid_min >= 0.05 &&
                            fixture.min_found >= 0.05 &&
                            std::abs(fixture.grid_min - 0.15) <= 1e-9;

  DiscreteChannel ident;
  ident.symbols = {"y0", "y1", "y2"};
  ident.rows = Eigen::MatrixXd::Identity(3, 3);
  InfeasibilityOptions iopt;
  iopt.seed = seed;
  iopt.grid_resolution = 0.05;  // any finer and the exhaustive pass is skipped
  const InfeasibilityReport identity =
      oblivious_rdp_infeasibility(model, ident, coarse, fine, iopt);
  const bool identity_pass = identity.certified && identity.grid_min <= 1e-12;

  // a-states share a symbol yet the minimum is still zero: a kernel that
  // never reconstructs into the confusable pair equalizes every accuracy
  DiscreteChannel separable;
  separable.symbols = {"y0", "y1"};
  separable.rows.resize(3, 2);
  separable.rows << 1, 0, 1, 0, 0, 1;
  InfeasibilityOptions sopt;
  sopt.seed = seed;
  const InfeasibilityReport separated =
      oblivious_rdp_infeasibility(model, separable, coarse, fine, sopt);
  const bool separable_pass = separated.certified && separated.grid_min <= 1e-12;

  SuiteResult res;
  res.pass = fixture_pass && identity_pass && separable_pass;
  res.report = {{"suite", "oblivious-rdp"},
                {"seed", seed},
                {"fixture", infeasibility_json(fixture, fopt.grid_resolution)},
                {"fixture_pass", fixture_pass},
                {"identity_control", infeasibility_json(identity, iopt.grid_resolution)},
                {"identity_pass", identity_pass},
                {"separable_control", infeasibility_json(separated, sopt.grid_resolution)},
                {"separable_pass", separable_pass},
                {"pass", res.pass}};
  return res;
}

json frontier_json(const FrontierReport& rep) {
  json pareto = json::array();
  for (const FrontierPoint& p : rep.pareto) {
    pareto.push_back({{"rdp", json_number(p.rdp)}, {"pr", json_number(p.pr)}});
  }
  return {{"pareto", std::move(pareto)},
          {"threshold", json_number(rep.threshold)},
          {"rdp_cut", rep.rdp_cut},
          {"pr_cut", rep.pr_cut},
          {"min_pr_given_rdp_below", json_number(rep.min_pr_given_rdp_below)},
          {"exclusion_holds", rep.exclusion_holds}};
}

// Cat/dog fixture: every kernel with a small accuracy gap pays a preservation
// gap of at least (1 - mean accuracy) * (majority - minority mass).
SuiteResult suite_frontier(std::uint64_t seed) {
  DiscreteModel catdog;
  catdog.states = {"cat", "dog"};
  catdog.prior = Eigen::Vector2d(0.2, 0.8);
  GroupCollection pets;
  pets.groups = {Group{"cats", {0}}, Group{"dogs", {1}}};
  DiscreteChannel noisy;
  noisy.symbols = {"y_cat", "y_dog"};
  noisy.rows.resize(2, 2);
  noisy.rows << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;

  const FrontierReport catdog_rep = rdp_pr_frontier(catdog, noisy, pets, 0.005, 0.01, 0.1);
  const bool catdog_pass = catdog_rep.exclusion_holds &&
                           std::abs(catdog_rep.min_pr_given_rdp_below - 0.198) <= 1e-9 &&
                           std::abs(catdog_rep.threshold - 0.2) <= 1e-9;

  DiscreteChannel ident;
  ident.symbols = {"y_cat", "y_dog"};
  ident.rows = Eigen::MatrixXd::Identity(2, 2);
  const FrontierReport ident_rep = rdp_pr_frontier(catdog, ident, pets, 0.005, 0.01, 0.1);
  const bool ident_pass = !ident_rep.exclusion_holds &&
                          ident_rep.min_pr_given_rdp_below <= 1e-12 &&
                          !ident_rep.pareto.empty() &&
                          ident_rep.pareto.front().rdp <= 1e-12 &&
                          ident_rep.pareto.front().pr <= 1e-12;

  // thin majority, near-perfect channel: the floor survives but is tiny
  DiscreteModel thin;
  thin.states = {"a", "b"};
  thin.prior = Eigen::Vector2d(0.51, 0.49);
  GroupCollection ab;
  ab.groups = {Group{"A", {0}}, Group{"B", {1}}};
  DiscreteChannel sharp;
  sharp.symbols = {"y0", "y1"};
  sharp.rows.resize(2, 2);
  sharp.rows << 0.98, 0.02, 0.02, 0.98;
  const FrontierReport thin_rep = rdp_pr_frontier(thin, sharp, ab, 0.005, 0.01, 1e-5);
  const bool thin_pass = thin_rep.exclusion_holds &&
                         thin_rep.min_pr_given_rdp_below > 0.0 &&
                         std::abs(thin_rep.min_pr_given_rdp_below - 3.6e-5) <= 1e-9 &&
                         std::abs(thin_rep.threshold - 4e-4) <= 1e-9;

  SuiteResult res;
  res.pass = catdog_pass && ident_pass && thin_pass;
  res.report = {{"suite", "rdp-pr"},
                {"seed", seed},
                {"catdog", frontier_json(catdog_rep)},
                {"catdog_pass", catdog_pass},
                {"identity_control", frontier_json(ident_rep)},
                {"identity_pass", ident_pass},
                {"thin_majority_control", frontier_json(thin_rep)},
                {"thin_majority_pass", thin_pass},
                {"pass", res.pass}};
  return res;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"case1", "case2", "case3", "oblivious-rdp", "rdp-pr"};
}

SuiteResult run_verify_suite(const std::string& suite, std::uint64_t seed) {
  if (suite == "case1") return suite_case1(seed);
  if (suite == "case2") return suite_case2(seed);
  if (suite == "case3") return suite_case3(seed);
  if (suite == "oblivious-rdp") return suite_oblivious(seed);
  if (suite == "rdp-pr") return suite_frontier(seed);
  throw ValidationError("unknown verify suite '" + suite + "'");
}

}  // namespace fairrec
