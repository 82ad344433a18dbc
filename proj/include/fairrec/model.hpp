#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

namespace fairrec {

// Tolerance used for "sums to one" checks on priors, channel rows, and
// mixture weights.
inline constexpr double kSimplexTol = 1e-12;

struct DiscreteModel {
  std::vector<std::string> states;
  Eigen::VectorXd prior;  // one entry per state, nonnegative, sums to 1

  int num_states() const { return static_cast<int>(prior.size()); }
};

struct Group {
  std::string name;
  std::vector<int> members;  // state indices, strictly increasing
};

// Named state sets. May overlap; `partition(n)` reports whether the groups
// cover every state exactly once.
struct GroupCollection {
  std::vector<Group> groups;

  int size() const { return static_cast<int>(groups.size()); }
  bool partition(int num_states) const;
  // index of the unique group containing `state`; PreconditionError when the
  // collection is not a partition of the model
  int group_of(int state, int num_states) const;
  bool contains(int group, int state) const;
};

struct DiscreteChannel {
  std::vector<std::string> symbols;
  // rows(x, y) = probability of symbol y given state x; row-stochastic
  Eigen::MatrixXd rows;

  int num_symbols() const { return static_cast<int>(rows.cols()); }
};

enum class NoiseVarianceRule {
  kSigmaSquared,       // observation noise variance sigma^2 per coordinate
  kSigmaSquaredOverM,  // sigma^2 / m, m = number of measurement rows
};

struct GaussianLinearChannel {
  Eigen::MatrixXd A;  // m x n measurement operator
  double sigma = 0.0;
  NoiseVarianceRule rule = NoiseVarianceRule::kSigmaSquared;

  double noise_variance() const {
    const double s2 = sigma * sigma;
    return rule == NoiseVarianceRule::kSigmaSquaredOverM
               ? s2 / static_cast<double>(A.rows())
               : s2;
  }
};

using Channel = std::variant<DiscreteChannel, GaussianLinearChannel>;

// Isotropic Gaussian mixture over R^d: component c has weight weights[c],
// mean means.row(c), covariance variances[c] * I.
struct GaussianMixture {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // components x dimension
  Eigen::VectorXd variances;

  int components() const { return static_cast<int>(weights.size()); }
  int dimension() const { return static_cast<int>(means.cols()); }
};

// Returns a list of human-readable violations ("" == none). Group and channel
// arguments are optional; when given they are checked against the model.
std::vector<std::string> validate(const DiscreteModel& model,
                                  const GroupCollection* groups = nullptr,
                                  const Channel* channel = nullptr);

// Throws ValidationError collecting all violations found by validate().
void require_valid(const DiscreteModel& model,
                   const GroupCollection* groups = nullptr,
                   const Channel* channel = nullptr);

std::vector<std::string> validate(const GaussianMixture& mixture);
void require_valid(const GaussianMixture& mixture);

// m x n operator averaging consecutive blocks of n/m coordinates. Requires
// m >= 1 and m | n; each row has n/m entries equal to m/n, so A*1 = 1.
Eigen::MatrixXd block_average_operator(int n, int m);

// psi(y) = sum_x prior(x) * rows(x, y); a distribution over symbols.
Eigen::VectorXd induced_measurement_distribution(const DiscreteModel& model,
                                                 const DiscreteChannel& channel);

// Total variation distance between distributions on a shared support,
// (1/2) * sum |a - b|.
double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Exact total variation between N(mu_a, sigma^2 I) and N(mu_b, sigma^2 I)
// with mean gap d = |mu_a - mu_b|_2: 2*Phi(d / (2 sigma)) - 1.
double gaussian_tv_distance(double mean_gap, double sigma);
double gaussian_tv_distance(const Eigen::VectorXd& mean_a,
                            const Eigen::VectorXd& mean_b, double sigma);

}  // namespace fairrec
