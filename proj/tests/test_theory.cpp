#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "fairrec/errors.hpp"
#include "fairrec/model.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/theory.hpp"

using namespace fairrec;

namespace {

Eigen::VectorXd random_distribution(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

DiscreteChannel random_channel(Rng& rng, int n, int ny) {
  DiscreteChannel ch;
  ch.rows.resize(n, ny);
  for (int i = 0; i < n; ++i) ch.rows.row(i) = random_distribution(rng, ny).transpose();
  for (int y = 0; y < ny; ++y) ch.symbols.push_back("y" + std::to_string(y));
  return ch;
}

std::vector<int> random_subset(Rng& rng, int n) {
  std::vector<int> s;
  while (s.empty()) {
    s.clear();
    for (int i = 0; i < n; ++i) {
      if (rng.uniform() < 0.5) s.push_back(i);
    }
  }
  return s;
}

DiscreteChannel catdog_channel() {
  DiscreteChannel c;
  c.symbols = {"y_cat", "y_dog"};
  c.rows.resize(2, 2);
  c.rows << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
  return c;
}

}  // namespace

TEST_CASE("matched priors make the reconstruction joint exactly symmetric") {
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng = Rng::substream(500, trial);
    const int n = static_cast<int>(rng.uniform_int(2, 12));
    const int ny = static_cast<int>(rng.uniform_int(2, 12));
    const Eigen::VectorXd R = random_distribution(rng, n);
    const DiscreteChannel ch = random_channel(rng, n, ny);
    const std::vector<int> U = random_subset(rng, n);
    const std::vector<int> V = random_subset(rng, n);
    const MismatchedJoint q = mismatched_joint(R, R, ch, U, V);
    CHECK(std::abs(q.q_uv - q.q_vu) < 1e-12);
  }
}

TEST_CASE("prior mismatch on the pet example breaks symmetry within twice the tv") {
  const Eigen::Vector2d R(0.2, 0.8);
  const Eigen::Vector2d P(0.25, 0.75);
  const MismatchedJoint q = mismatched_joint(R, P, catdog_channel(), {0}, {1});
  CHECK(q.q_uv == doctest::Approx(24.0 / 175.0).epsilon(1e-14));
  CHECK(q.q_vu == doctest::Approx(0.18285714285714286).epsilon(1e-13));
  const double diff = std::abs(q.q_uv - q.q_vu);
  CHECK(diff == doctest::Approx(0.045714285714285714).epsilon(1e-12));
  CHECK(diff <= 2.0 * tv_distance(R, P) + 1e-12);  // 2 tv = 0.1
}

TEST_CASE("overlapping sets nearly saturate the tv bound") {
  Eigen::Vector4d R(0.84, 0.02, 0.10, 0.04);
  Eigen::Vector4d P(0.84, 0.06, 0.10, 0.00);
  DiscreteChannel ch;
  ch.symbols = {"y0", "y1", "y2"};
  ch.rows.resize(4, 3);
  ch.rows << 0.10, 0.30, 0.60,
             0.45, 0.48, 0.07,
             0.86, 0.12, 0.02,
             0.60, 0.33, 0.07;
  const MismatchedJoint q = mismatched_joint(R, P, ch, {0, 1, 2}, {0, 2, 3});
  CHECK(q.q_uv == doctest::Approx(0.9043785794507043).epsilon(1e-12));
  CHECK(q.q_vu == doctest::Approx(0.9800000000000001).epsilon(1e-12));
  const double diff = std::abs(q.q_uv - q.q_vu);
  const double bound = 2.0 * tv_distance(R, P);
  CHECK(bound == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(diff <= bound + 1e-12);
  CHECK(diff / bound > 0.94);  // disjoint two-state pairs cap at one half
}

TEST_CASE("mismatched joint rejects malformed inputs") {
  const Eigen::Vector2d R(0.5, 0.5);
  CHECK_THROWS_AS(mismatched_joint(R, Eigen::Vector3d(0.2, 0.3, 0.5), catdog_channel(),
                                   {0}, {1}),
                  ValidationError);
  CHECK_THROWS_AS(mismatched_joint(R, R, catdog_channel(), {0, 2}, {1}),
                  ValidationError);
  CHECK_THROWS_AS(mismatched_joint(Eigen::Vector2d(0.7, 0.7), R, catdog_channel(),
                                   {0}, {1}),
                  ValidationError);
}

TEST_CASE("randomized tv bound checker") {
  SUBCASE("equal priors short-circuit to exact symmetry") {
    Rng rng(77);
    const Eigen::VectorXd R = random_distribution(rng, 5);
    const DiscreteChannel ch = random_channel(rng, 5, 4);
    const TvBoundReport rep = check_tv_spe_bound(R, R, ch, 50, 123);
    CHECK(rep.tv_zero);
    CHECK(rep.tv == 0.0);
    CHECK(rep.holds);
    CHECK(rep.worst_ratio == 0.0);
  }
  SUBCASE("random mismatched configurations all satisfy the bound") {
    for (int cfg = 0; cfg < 20; ++cfg) {
      Rng rng = Rng::substream(501, cfg);
      const int n = static_cast<int>(rng.uniform_int(2, 10));
      const int ny = static_cast<int>(rng.uniform_int(2, 10));
      const Eigen::VectorXd R = random_distribution(rng, n);
      const Eigen::VectorXd P = random_distribution(rng, n);
      const DiscreteChannel ch = random_channel(rng, n, ny);
      const TvBoundReport rep = check_tv_spe_bound(R, P, ch, 50, rng.next_u64());
      CHECK(rep.holds);
      CHECK(rep.trials == 50);
      CHECK(rep.worst_ratio <= 1.0 + 1e-9);
      CHECK(rep.worst.bound == doctest::Approx(2.0 * tv_distance(R, P)).epsilon(1e-12));
    }
  }
  SUBCASE("validation") {
    Rng rng(9);
    const Eigen::VectorXd R = random_distribution(rng, 4);
    const DiscreteChannel ch = random_channel(rng, 4, 3);
    CHECK_THROWS_AS(check_tv_spe_bound(R, R, ch, 0, 1), ValidationError);
    CHECK_THROWS_AS(check_tv_spe_bound(R, random_distribution(rng, 3), ch, 5, 1),
                    ValidationError);
  }
}

TEST_CASE("grid fixtures behave") {
  Grid1D grid;
  grid.cells = 40;
  grid.spacing = 1.0;

  SUBCASE("gaussian profile is a distribution with a cleared tail") {
    const Eigen::VectorXd R = grid_gaussian(grid, 20.0, 4.0, 3);
    CHECK(R.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(R.minCoeff() >= 0.0);
    CHECK(R[37] == 0.0);
    CHECK(R[39] == 0.0);
    CHECK(R[20] > R[10]);
    CHECK_THROWS_AS(grid_gaussian(grid, 20.0, 0.0, 0), ValidationError);
    CHECK_THROWS_AS(grid_gaussian(grid, 20.0, 1.0, 40), ValidationError);
  }
  SUBCASE("shift moves mass and refuses to drop it") {
    const Eigen::VectorXd R = grid_gaussian(grid, 20.0, 4.0, 2);
    const Eigen::VectorXd S = shifted(R, 2);
    CHECK(S[12] == doctest::Approx(R[10]).epsilon(1e-15));
    CHECK(S[0] == 0.0);
    CHECK(S.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(shifted(R, 3), PreconditionError);  // tail only two cells wide
  }
  SUBCASE("shift coupling has the right marginals and displacement") {
    const Eigen::VectorXd R = grid_gaussian(grid, 18.0, 3.0, 2);
    const Coupling c = shift_coupling(R, 2, grid);
    CHECK(c.epsilon == doctest::Approx(2.0).epsilon(1e-15));
    check_coupling(c, R, shifted(R, 2), grid);  // must not throw

    Coupling broken = c;
    broken.epsilon = 1.0;
    CHECK_THROWS_AS(check_coupling(broken, R, shifted(R, 2), grid), PreconditionError);
    CHECK_THROWS_AS(check_coupling(c, R, R, grid), PreconditionError);
  }
  SUBCASE("block channel confuses within blocks only") {
    const DiscreteChannel ch = block_gaussian_channel(grid, 4, 6.0, 10);
    REQUIRE(ch.rows.rows() == 40);
    REQUIRE(ch.rows.cols() == 10);
    for (int i = 0; i < 40; ++i) {
      CHECK(ch.rows.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(ch.rows.row(i).minCoeff() >= 0.0);
    }
    // cells 0 and 9 share a block, cells 0 and 10 do not
    CHECK((ch.rows.row(0) - ch.rows.row(9)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ch.rows.row(0) - ch.rows.row(10)).cwiseAbs().maxCoeff() > 1e-3);
    CHECK_THROWS_AS(block_gaussian_channel(grid, 7, 6.0, 10), ValidationError);
    CHECK_THROWS_AS(block_gaussian_channel(grid, 4, -1.0, 10), ValidationError);
    CHECK_THROWS_AS(block_gaussian_channel(grid, 4, 6.0, 1), ValidationError);
  }
}

TEST_CASE("bounded-displacement perturbation stays within four delta") {
  Grid1D grid;
  grid.cells = 60;
  grid.spacing = 1.0;
  const Eigen::VectorXd R = grid_gaussian(grid, 30.0, 4.0, 2);
  const Eigen::VectorXd P = shifted(R, 2);
  const Coupling coupling = shift_coupling(R, 2, grid);
  const DiscreteChannel ch = block_gaussian_channel(grid, 6, 8.0, 12);
  const CellInterval U{10, 30};
  const CellInterval V{25, 45};

  const WinfBoundReport rep = check_winf_spe_bound(R, P, grid, coupling, ch, U, V);
  CHECK(rep.holds);
  CHECK(std::abs(rep.q_uv - rep.q_vu) <= rep.bound + 1e-12);
  CHECK(rep.bound == doctest::Approx(4.0 * rep.delta_eff).epsilon(1e-15));
  CHECK(rep.delta_eff >= rep.boundary_r_u);
  CHECK(rep.delta_eff >= rep.channel_tv_max);
  CHECK_FALSE(rep.target_exceeded);

  const WinfBoundReport flagged =
      check_winf_spe_bound(R, P, grid, coupling, ch, U, V, 1e-9);
  CHECK(flagged.target_exceeded);  // delta_eff is well above one nano
  const WinfBoundReport unflagged =
      check_winf_spe_bound(R, P, grid, coupling, ch, U, V, 1.0);
  CHECK_FALSE(unflagged.target_exceeded);

  CHECK_THROWS_AS(check_winf_spe_bound(R, P, grid, coupling, ch, CellInterval{30, 10}, V),
                  ValidationError);
}

TEST_CASE("indistinguishable subgroups cannot satisfy both partitions") {
  DiscreteModel m;
  m.states = {"a1", "a2", "b"};
  m.prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  DiscreteChannel shared;
  shared.symbols = {"y"};
  shared.rows = Eigen::MatrixXd::Ones(3, 1);
  GroupCollection coarse;
  coarse.groups = {Group{"A", {0, 1}}, Group{"B", {2}}};
  GroupCollection fine;
  fine.groups = {Group{"a1", {0}}, Group{"a2", {1}}, Group{"b", {2}}};

  const InfeasibilityReport rep = oblivious_rdp_infeasibility(m, shared, coarse, fine);
  CHECK(rep.certified);
  CHECK(rep.grid_min == doctest::Approx(0.15).epsilon(1e-9));
  CHECK(rep.grid_min >= 0.05);
  CHECK(rep.min_found >= 1.0 / 7.0 - 1e-9);  // continuous optimum is one seventh
  CHECK(rep.min_found <= 0.16);
  REQUIRE(rep.kernel.rows() == 1);
  REQUIRE(rep.kernel.cols() == 3);
  CHECK(rep.kernel.row(0).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("identity and separable channels admit joint equalization") {
  DiscreteModel m;
  m.states = {"a1", "a2", "b"};
  m.prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  GroupCollection coarse;
  coarse.groups = {Group{"A", {0, 1}}, Group{"B", {2}}};
  GroupCollection fine;
  fine.groups = {Group{"a1", {0}}, Group{"a2", {1}}, Group{"b", {2}}};

  SUBCASE("identity channel") {
    DiscreteChannel ident;
    ident.symbols = {"y0", "y1", "y2"};
    ident.rows = Eigen::MatrixXd::Identity(3, 3);
    InfeasibilityOptions opt;
    opt.grid_resolution = 0.05;  // keeps the exhaustive pass near ten million points
    const InfeasibilityReport rep =
        oblivious_rdp_infeasibility(m, ident, coarse, fine, opt);
    CHECK(rep.certified);
    CHECK(rep.grid_min <= 1e-12);
    CHECK(rep.min_found <= 0.01);  // the descent stalls near zero, the grid is exact
  }
  SUBCASE("subgroup-blind but group-separating channel") {
    DiscreteChannel sep;
    sep.symbols = {"y0", "y1"};
    sep.rows.resize(3, 2);
    sep.rows << 1, 0,
                1, 0,
                0, 1;
    const InfeasibilityReport rep = oblivious_rdp_infeasibility(m, sep, coarse, fine);
    CHECK(rep.certified);
    CHECK(rep.grid_min <= 1e-12);
  }
}

TEST_CASE("objective floor fades as the subgroups separate") {
  DiscreteModel m;
  m.states = {"a1", "a2", "b"};
  m.prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  GroupCollection coarse;
  coarse.groups = {Group{"A", {0, 1}}, Group{"B", {2}}};
  GroupCollection fine;
  fine.groups = {Group{"a1", {0}}, Group{"a2", {1}}, Group{"b", {2}}};
  InfeasibilityOptions opt;
  opt.grid_resolution = 0.02;
  opt.multistarts = 4;  // the certified pass carries the assertions

  double prev = std::numeric_limits<double>::infinity();
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    DiscreteChannel ch;
    ch.symbols = {"y0", "y1"};
    ch.rows.resize(3, 2);
    ch.rows << 1.0, 0.0,
               1.0, 0.0,
               1.0 - t, t;
    const InfeasibilityReport rep = oblivious_rdp_infeasibility(m, ch, coarse, fine, opt);
    REQUIRE(rep.certified);
    if (t < 1.0) {
      CHECK(rep.grid_min > 1e-9);
    } else {
      CHECK(rep.grid_min <= 1e-12);
    }
    // grid refinement noise allows a small uphill step, no more
    CHECK(rep.grid_min <= prev + 0.02);
    prev = rep.grid_min;
  }
}

TEST_CASE("infeasibility checker validates its inputs") {
  DiscreteModel m;
  m.states = {"a1", "a2", "b"};
  m.prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  DiscreteChannel shared;
  shared.symbols = {"y"};
  shared.rows = Eigen::MatrixXd::Ones(3, 1);
  GroupCollection coarse;
  coarse.groups = {Group{"A", {0, 1}}, Group{"B", {2}}};
  GroupCollection fine;
  fine.groups = {Group{"a1", {0}}, Group{"a2", {1}}, Group{"b", {2}}};

  SUBCASE("both collections must partition") {
    // covers every state, so only the overlap trips the partition requirement
    GroupCollection overlapping;
    overlapping.groups = {Group{"A", {0, 1, 2}}, Group{"B", {2}}};
    CHECK_THROWS_AS(oblivious_rdp_infeasibility(m, shared, overlapping, fine),
                    PreconditionError);
  }
  SUBCASE("zero-mass groups are rejected") {
    DiscreteModel mzero = m;
    mzero.prior = Eigen::Vector3d(0.5, 0.5, 0.0);
    CHECK_THROWS_AS(oblivious_rdp_infeasibility(mzero, shared, coarse, fine),
                    PreconditionError);
  }
  SUBCASE("option validation") {
    InfeasibilityOptions opt;
    opt.multistarts = 0;
    CHECK_THROWS_AS(oblivious_rdp_infeasibility(m, shared, coarse, fine, opt),
                    ValidationError);
    opt.multistarts = 2;
    opt.grid_resolution = 0.0;
    CHECK_THROWS_AS(oblivious_rdp_infeasibility(m, shared, coarse, fine, opt),
                    ValidationError);
  }
  SUBCASE("oversized grids skip certification") {
    DiscreteChannel ident;
    ident.symbols = {"y0", "y1", "y2"};
    ident.rows = Eigen::MatrixXd::Identity(3, 3);
    InfeasibilityOptions opt;
    opt.grid_resolution = 0.01;
    opt.max_grid_points = 1e4;  // far below the needed enumeration
    opt.multistarts = 2;
    opt.iterations = 500;
    const InfeasibilityReport rep =
        oblivious_rdp_infeasibility(m, ident, coarse, fine, opt);
    CHECK_FALSE(rep.certified);
  }
}

TEST_CASE("accuracy-parity floor forces representation drift") {
  DiscreteModel catdog;
  catdog.states = {"cat", "dog"};
  catdog.prior = Eigen::Vector2d(0.2, 0.8);
  GroupCollection pets;
  pets.groups = {Group{"cats", {0}}, Group{"dogs", {1}}};

  const FrontierReport rep =
      rdp_pr_frontier(catdog, catdog_channel(), pets, 0.005, 0.01, 0.1);
  CHECK(rep.exclusion_holds);
  CHECK(rep.min_pr_given_rdp_below == doctest::Approx(0.198).epsilon(1e-9));
  CHECK(rep.threshold == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(rep.rdp_cut == 0.01);
  CHECK(rep.pr_cut == 0.1);
  REQUIRE(!rep.pareto.empty());
  CHECK(rep.pareto.size() == 112);
  for (size_t i = 1; i < rep.pareto.size(); ++i) {
    CHECK(rep.pareto[i].rdp > rep.pareto[i - 1].rdp);
    CHECK(rep.pareto[i].pr < rep.pareto[i - 1].pr);  // non-dominated sweep
  }
}

TEST_CASE("identity channel reaches the fair corner") {
  DiscreteModel catdog;
  catdog.states = {"cat", "dog"};
  catdog.prior = Eigen::Vector2d(0.2, 0.8);
  GroupCollection pets;
  pets.groups = {Group{"cats", {0}}, Group{"dogs", {1}}};
  DiscreteChannel ident;
  ident.symbols = {"y0", "y1"};
  ident.rows = Eigen::MatrixXd::Identity(2, 2);

  const FrontierReport rep = rdp_pr_frontier(catdog, ident, pets, 0.005, 0.01, 0.1);
  CHECK_FALSE(rep.exclusion_holds);
  CHECK(rep.min_pr_given_rdp_below <= 1e-12);
  REQUIRE(!rep.pareto.empty());
  CHECK(rep.pareto.front().rdp <= 1e-12);
  CHECK(rep.pareto.front().pr <= 1e-12);
}

TEST_CASE("thin majorities leave a small but positive floor") {
  DiscreteModel thin;
  thin.states = {"a", "b"};
  thin.prior = Eigen::Vector2d(0.51, 0.49);
  GroupCollection ab;
  ab.groups = {Group{"A", {0}}, Group{"B", {1}}};
  DiscreteChannel sharp;
  sharp.symbols = {"y0", "y1"};
  sharp.rows.resize(2, 2);
  sharp.rows << 0.98, 0.02, 0.02, 0.98;

  const FrontierReport rep = rdp_pr_frontier(thin, sharp, ab, 0.005, 0.01, 1e-5);
  CHECK(rep.exclusion_holds);
  CHECK(rep.min_pr_given_rdp_below > 0.0);
  CHECK(rep.min_pr_given_rdp_below == doctest::Approx(3.6e-5).epsilon(1e-4));
  CHECK(rep.threshold == doctest::Approx(4e-4).epsilon(1e-9));
}

TEST_CASE("frontier sweep precondition and validation failures") {
  DiscreteModel catdog;
  catdog.states = {"cat", "dog"};
  catdog.prior = Eigen::Vector2d(0.2, 0.8);
  GroupCollection pets;
  pets.groups = {Group{"cats", {0}}, Group{"dogs", {1}}};

  SUBCASE("needs exactly two groups") {
    GroupCollection one;
    one.groups = {Group{"all", {0, 1}}};
    CHECK_THROWS_AS(rdp_pr_frontier(catdog, catdog_channel(), one, 0.01, 0.01, 0.1),
                    PreconditionError);
  }
  SUBCASE("needs a strict majority") {
    DiscreteModel even = catdog;
    even.prior = Eigen::Vector2d(0.5, 0.5);
    CHECK_THROWS_AS(rdp_pr_frontier(even, catdog_channel(), pets, 0.01, 0.01, 0.1),
                    PreconditionError);
  }
  SUBCASE("at most three symbols") {
    DiscreteChannel wide;
    wide.symbols = {"y0", "y1", "y2", "y3"};
    wide.rows = Eigen::MatrixXd::Constant(2, 4, 0.25);
    CHECK_THROWS_AS(rdp_pr_frontier(catdog, wide, pets, 0.01, 0.01, 0.1),
                    PreconditionError);
  }
  SUBCASE("resolution must be usable") {
    CHECK_THROWS_AS(rdp_pr_frontier(catdog, catdog_channel(), pets, 0.0, 0.01, 0.1),
                    ValidationError);
  }
}
