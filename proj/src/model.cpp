#include "fairrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairrec/errors.hpp"

namespace fairrec {

bool GroupCollection::partition(int num_states) const {
  std::vector<int> hits(num_states, 0);
  for (const auto& g : groups) {
    for (int s : g.members) {
      if (s < 0 || s >= num_states) return false;
      ++hits[s];
    }
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

int GroupCollection::group_of(int state, int num_states) const {
  if (!partition(num_states)) {
    throw PreconditionError("group_of: collection is not a partition");
  }
  for (int i = 0; i < size(); ++i) {
    if (contains(i, state)) return i;
  }
  throw PreconditionError("group_of: state has no group");
}

bool GroupCollection::contains(int group, int state) const {
  const auto& m = groups[group].members;
  return std::binary_search(m.begin(), m.end(), state);
}

namespace {

void check_distribution(const Eigen::VectorXd& p, const char* what,
                        std::vector<std::string>& out) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
      std::ostringstream os;
      os << what << "[" << i << "] = " << p[i] << " is not a probability";
      out.push_back(os.str());
      return;
    }
  }
  const double s = p.sum();
  if (std::abs(s - 1.0) > kSimplexTol) {
    std::ostringstream os;
    os << what << " sums to " << s << ", expected 1 within " << kSimplexTol;
    out.push_back(os.str());
  }
}

}  // namespace

std::vector<std::string> validate(const DiscreteModel& model,
                                  const GroupCollection* groups,
                                  const Channel* channel) {
  std::vector<std::string> out;
  const int n = model.num_states();
  if (n == 0) out.push_back("model has no states");
  if (!model.states.empty() &&
      static_cast<int>(model.states.size()) != n) {
    out.push_back("state label count does not match prior length");
  }
  check_distribution(model.prior, "prior", out);

  if (groups) {
    std::vector<int> covered(n, 0);
    for (const auto& g : groups->groups) {
      if (g.members.empty()) out.push_back("group '" + g.name + "' is empty");
      int prev = -1;
      for (int s : g.members) {
        if (s < 0 || s >= n) {
          out.push_back("group '" + g.name + "' references state " + std::to_string(s));
        } else {
          if (s <= prev) out.push_back("group '" + g.name + "' members not strictly increasing");
          covered[s] = 1;
        }
        prev = s;
      }
    }
    for (int s = 0; s < n; ++s) {
      if (!covered[s]) out.push_back("state " + std::to_string(s) + " belongs to no group");
    }
  }

  if (channel) {
    if (const auto* dc = std::get_if<DiscreteChannel>(channel)) {
      if (static_cast<int>(dc->rows.rows()) != n) {
        out.push_back("channel has " + std::to_string(dc->rows.rows()) +
                      " rows for " + std::to_string(n) + " states");
      }
      if (!dc->symbols.empty() &&
          static_cast<int>(dc->symbols.size()) != dc->num_symbols()) {
        out.push_back("channel symbol label count does not match column count");
      }
      for (Eigen::Index r = 0; r < dc->rows.rows(); ++r) {
        Eigen::VectorXd row = dc->rows.row(r);
        std::vector<std::string> rowv;
        check_distribution(row, "channel row", rowv);
        for (auto& v : rowv) out.push_back(v + " (state " + std::to_string(r) + ")");
      }
    } else if (const auto* gc = std::get_if<GaussianLinearChannel>(channel)) {
      if (!(gc->sigma > 0.0)) out.push_back("gaussian channel requires sigma > 0");
      if (gc->A.size() == 0) out.push_back("gaussian channel operator is empty");
    }
  }
  return out;
}

void require_valid(const DiscreteModel& model, const GroupCollection* groups,
                   const Channel* channel) {
  const auto violations = validate(model, groups, channel);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += "\n  - " + v;
  throw ValidationError(msg);
}

std::vector<std::string> validate(const GaussianMixture& mixture) {
  std::vector<std::string> out;
  check_distribution(mixture.weights, "mixture weights", out);
  if (mixture.means.rows() != mixture.weights.size()) {
    out.push_back("mixture mean count does not match weight count");
  }
  if (mixture.variances.size() != mixture.weights.size()) {
    out.push_back("mixture variance count does not match weight count");
  }
  for (Eigen::Index c = 0; c < mixture.variances.size(); ++c) {
    if (!(mixture.variances[c] > 0.0)) {
      out.push_back("mixture variance " + std::to_string(c) + " must be positive");
    }
  }
  return out;
}

void require_valid(const GaussianMixture& mixture) {
  const auto violations = validate(mixture);
  if (violations.empty()) return;
  std::string msg = "invalid mixture:";
  for (const auto& v : violations) msg += "\n  - " + v;
  throw ValidationError(msg);
}

Eigen::MatrixXd block_average_operator(int n, int m) {
  if (n <= 0 || m <= 0 || n % m != 0) {
    throw ValidationError("block_average_operator: need m >= 1 and m | n, got n=" +
                          std::to_string(n) + " m=" + std::to_string(m));
  }
  const int per = n / m;
  const double w = static_cast<double>(m) / static_cast<double>(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  for (int b = 0; b < m; ++b) {
    for (int j = 0; j < per; ++j) A(b, b * per + j) = w;
  }
  return A;
}

Eigen::VectorXd induced_measurement_distribution(const DiscreteModel& model,
                                                 const DiscreteChannel& channel) {
  Channel ch = channel;
  require_valid(model, nullptr, &ch);
  return channel.rows.transpose() * model.prior;
}

double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ValidationError("tv_distance: supports differ in size");
  }
  return 0.5 * (a - b).cwiseAbs().sum();
}

double gaussian_tv_distance(double mean_gap, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian_tv_distance: sigma must be positive");
  if (mean_gap < 0.0) throw ValidationError("gaussian_tv_distance: negative mean gap");
  // 2*Phi(d/(2s)) - 1 = erf(d / (2*sqrt(2)*s))
  return std::erf(mean_gap / (2.0 * std::sqrt(2.0) * sigma));
}

double gaussian_tv_distance(const Eigen::VectorXd& mean_a,
                            const Eigen::VectorXd& mean_b, double sigma) {
  if (mean_a.size() != mean_b.size()) {
    throw ValidationError("gaussian_tv_distance: mean dimensions differ");
  }
  return gaussian_tv_distance((mean_a - mean_b).norm(), sigma);
}

}  // namespace fairrec
