#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairrec/metrics.hpp"
#include "fairrec/model.hpp"
#include "fairrec/posterior.hpp"
#include "fairrec/reweight.hpp"
#include "fairrec/stats.hpp"

namespace fairrec {

// Scenario content problem, carrying a JSON-pointer-style location such as
// "/channel/rows/1". Parse failures carry "<file>:<line>:<column>" instead.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// Annealed-Langevin run description: sample the posterior of x under the
// mixture prior given y observed through the Gaussian linear channel.
struct LangevinScenario {
  GaussianMixture mixture;
  GaussianLinearChannel channel;
  Eigen::VectorXd y;
  AnnealSchedule schedule;
  long chains = 1;
  // when set, the report includes the fraction of chains with
  // x[split_dim] > split_threshold
  int split_dim = 0;
  std::optional<double> split_threshold;
};

// Pre-tabulated audit counts, rows = true group, columns = reconstructed.
struct CountsTable {
  std::vector<std::string> group_names;
  Eigen::MatrixXd table;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  std::optional<DiscreteModel> model;
  std::optional<GroupCollection> groups;
  std::optional<Channel> channel;
  std::optional<ReconstructionKernel> kernel;  // defaults to the exact posterior
  bool has_audit = false;
  long long audit_samples = 0;
  double significance = 0.05;
  std::optional<CountsTable> counts;
  std::optional<ReweightOptions> reweight;
  std::optional<LangevinScenario> langevin;
};

// Throws SchemaError with a field pointer on any malformed or unknown content.
Scenario parse_scenario(const nlohmann::json& j, const std::string& default_name);

// Reads and parses a scenario file; JSON syntax errors are reported with the
// file, line and column of the offending byte.
Scenario load_scenario(const std::string& path);

// JSON value for a double. JSON has no literals for non-finite numbers, so
// they map to the strings "inf", "-inf" and "nan".
nlohmann::json json_number(double v);
nlohmann::json json_vector(const Eigen::VectorXd& v);
nlohmann::json json_matrix(const Eigen::MatrixXd& m);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const AuditReport& report);
nlohmann::json to_json(const ReweightResult& result,
                       const std::vector<std::string>& group_names);

// Runs the Langevin scenario and summarizes the draws (per-coordinate mean,
// sample sd, standard error, optional split fraction).
nlohmann::json run_langevin_scenario(const LangevinScenario& scenario,
                                     std::uint64_t seed);

// CSV exports. Counts use rows = true group; the pair table is the
// plot-ready error-fraction series with its confidence bounds.
void write_counts_csv(std::ostream& os, const AuditReport& report);
void write_pairs_csv(std::ostream& os, const AuditReport& report);
void write_trace_csv(std::ostream& os, const ReweightResult& result,
                     const std::vector<std::string>& group_names);

}  // namespace fairrec
