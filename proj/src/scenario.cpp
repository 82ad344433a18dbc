#include "fairrec/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

#include "fairrec/errors.hpp"

namespace fairrec {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where, what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(where + "/" + it.key(), "unknown field");
  }
}

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const char* key, const std::string& where) {
  const json* p = find(j, key);
  if (!p) fail(where, std::string("missing required field '") + key + "'");
  return *p;
}

const json& need_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return j;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

long long as_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_number(j[i], where + "/" + std::to_string(i));
  }
  return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rwhere = where + "/" + std::to_string(r);
    const Eigen::VectorXd row = as_vector(j[r], rwhere);
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      fail(rwhere, "rows must all have the same length");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Eigen::VectorXd normalized_from_weights(const Eigen::VectorXd& w, const std::string& where) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0)) fail(where + "/" + std::to_string(i), "weights must be nonnegative");
  }
  const double s = w.sum();
  if (!(s > 0.0)) fail(where, "weights must have positive total");
  return w / s;
}

// A distribution given either directly or as unnormalized weights; weights
// let scenarios express exact thirds and the like.
Eigen::VectorXd parse_distribution(const json& parent, const char* plain,
                                   const char* weights, const std::string& where,
                                   Eigen::Index expected, bool required) {
  const json* p = find(parent, plain);
  const json* w = find(parent, weights);
  if (p && w) {
    fail(where, std::string("give either '") + plain + "' or '" + weights + "', not both");
  }
  if (!p && !w) {
    if (!required) return Eigen::VectorXd();
    fail(where, std::string("missing required field '") + plain + "' (or '" + weights + "')");
  }
  const std::string vwhere = where + "/" + (p ? plain : weights);
  Eigen::VectorXd v = as_vector(p ? *p : *w, vwhere);
  if (expected >= 0 && v.size() != expected) {
    fail(vwhere, "expected " + std::to_string(expected) + " entries");
  }
  if (w) v = normalized_from_weights(v, vwhere);
  return v;
}

DiscreteModel parse_model(const json& j, const std::string& where) {
  need_object(j, where);
  check_keys(j, where, {"states", "prior", "prior_weights"});
  const json& st = need(j, "states", where);
  std::vector<std::string> states;
  if (st.is_number_integer()) {
    const long long n = st.get<long long>();
    if (n < 1 || n > 100000) fail(where + "/states", "state count out of range");
    for (long long s = 0; s < n; ++s) states.push_back("s" + std::to_string(s));
  } else if (st.is_array()) {
    for (std::size_t i = 0; i < st.size(); ++i) {
      states.push_back(as_string(st[i], where + "/states/" + std::to_string(i)));
    }
    if (states.empty()) fail(where + "/states", "expected at least one state");
  } else {
    fail(where + "/states", "expected an array of names or a count");
  }
  DiscreteModel model;
  model.states = std::move(states);
  model.prior = parse_distribution(j, "prior", "prior_weights", where,
                                   static_cast<Eigen::Index>(model.states.size()), true);
  return model;
}

GroupCollection parse_groups(const json& j, const std::string& where, int num_states) {
  need_object(j, where);
  if (j.empty()) fail(where, "expected at least one group");
  GroupCollection gc;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string gwhere = where + "/" + it.key();
    const json& arr = it.value();
    if (!arr.is_array() || arr.empty()) {
      fail(gwhere, "expected a nonempty array of state indices");
    }
    Group g;
    g.name = it.key();
    long long prev = -1;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string swhere = gwhere + "/" + std::to_string(i);
      const long long s = as_integer(arr[i], swhere);
      if (s < 0 || s >= num_states) fail(swhere, "state index out of range");
      if (s <= prev) fail(swhere, "state indices must be strictly increasing");
      g.members.push_back(static_cast<int>(s));
      prev = s;
    }
    gc.groups.push_back(std::move(g));
  }
  return gc;
}

DiscreteChannel parse_discrete_channel(const json& j, const std::string& where,
                                       int num_states) {
  const json* rows = find(j, "rows");
  const json* weights = find(j, "row_weights");
  if (rows && weights) fail(where, "give either 'rows' or 'row_weights', not both");
  if (!rows && !weights) fail(where, "missing required field 'rows' (or 'row_weights')");
  const std::string mwhere = where + (rows ? "/rows" : "/row_weights");
  Eigen::MatrixXd m = as_matrix(rows ? *rows : *weights, mwhere);
  if (num_states >= 0 && m.rows() != num_states) {
    fail(mwhere, "expected one row per state (" + std::to_string(num_states) + ")");
  }
  if (weights) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m.row(r) = normalized_from_weights(m.row(r).transpose(),
                                         mwhere + "/" + std::to_string(r))
                     .transpose();
    }
  }
  DiscreteChannel chan;
  chan.rows = std::move(m);
  if (const json* sym = find(j, "symbols")) {
    for (std::size_t i = 0; i < sym->size(); ++i) {
      chan.symbols.push_back(as_string((*sym)[i], where + "/symbols/" + std::to_string(i)));
    }
    if (static_cast<Eigen::Index>(chan.symbols.size()) != chan.rows.cols()) {
      fail(where + "/symbols", "expected one name per channel column");
    }
  } else {
    for (Eigen::Index y = 0; y < chan.rows.cols(); ++y) {
      chan.symbols.push_back("y" + std::to_string(y));
    }
  }
  return chan;
}

GaussianLinearChannel parse_gaussian_channel(const json& j, const std::string& where) {
  GaussianLinearChannel chan;
  const json* a = find(j, "A");
  const json* blk = find(j, "block_average");
  if (a && blk) fail(where, "give either 'A' or 'block_average', not both");
  if (!a && !blk) fail(where, "missing required field 'A' (or 'block_average')");
  if (a) {
    chan.A = as_matrix(*a, where + "/A");
  } else {
    const std::string bwhere = where + "/block_average";
    need_object(*blk, bwhere);
    check_keys(*blk, bwhere, {"n", "m"});
    const long long n = as_integer(need(*blk, "n", bwhere), bwhere + "/n");
    const long long m = as_integer(need(*blk, "m", bwhere), bwhere + "/m");
    try {
      chan.A = block_average_operator(static_cast<int>(n), static_cast<int>(m));
    } catch (const ValidationError& e) {
      fail(bwhere, e.what());
    }
  }
  chan.sigma = as_number(need(j, "sigma", where), where + "/sigma");
  if (!(chan.sigma >= 0.0)) fail(where + "/sigma", "sigma must be nonnegative");
  if (const json* rule = find(j, "noise_rule")) {
    const std::string r = as_string(*rule, where + "/noise_rule");
    if (r == "sigma_squared") {
      chan.rule = NoiseVarianceRule::kSigmaSquared;
    } else if (r == "sigma_squared_over_m") {
      chan.rule = NoiseVarianceRule::kSigmaSquaredOverM;
    } else {
      fail(where + "/noise_rule", "expected 'sigma_squared' or 'sigma_squared_over_m'");
    }
  }
  return chan;
}

Channel parse_channel(const json& j, const std::string& where, int num_states) {
  need_object(j, where);
  check_keys(j, where,
             {"type", "symbols", "rows", "row_weights", "A", "block_average", "sigma",
              "noise_rule"});
  const std::string type = as_string(need(j, "type", where), where + "/type");
  if (type == "discrete") return parse_discrete_channel(j, where, num_states);
  if (type == "gaussian") return parse_gaussian_channel(j, where);
  fail(where + "/type", "expected 'discrete' or 'gaussian'");
}

ReconstructionKernel parse_kernel(const json& j, const std::string& where,
                                  const DiscreteModel& model,
                                  const DiscreteChannel* channel) {
  need_object(j, where);
  check_keys(j, where, {"type", "prior", "prior_weights", "rows"});
  const std::string type = as_string(need(j, "type", where), where + "/type");
  if (type == "exact_posterior" || type == "map") {
    DiscreteModel assumed = model;
    const Eigen::VectorXd prior =
        parse_distribution(j, "prior", "prior_weights", where,
                           static_cast<Eigen::Index>(model.num_states()), false);
    if (prior.size() > 0) assumed.prior = prior;
    if (find(j, "rows")) fail(where + "/rows", "only 'fixed' kernels take rows");
    if (type == "map") return MapBaselineKernel{std::move(assumed)};
    return ExactPosteriorKernel{std::move(assumed)};
  }
  if (type == "fixed") {
    if (!channel) fail(where, "'fixed' kernels require a discrete channel");
    Eigen::MatrixXd rows = as_matrix(need(j, "rows", where), where + "/rows");
    if (rows.rows() != channel->num_symbols() || rows.cols() != model.num_states()) {
      fail(where + "/rows", "expected a symbols-by-states matrix");
    }
    return FixedStochasticKernel{std::move(rows)};
  }
  fail(where + "/type", "expected 'exact_posterior', 'map' or 'fixed'");
}

GaussianMixture parse_mixture(const json& j, const std::string& where) {
  need_object(j, where);
  check_keys(j, where, {"weights", "means", "variances"});
  GaussianMixture mix;
  mix.weights = normalized_from_weights(
      as_vector(need(j, "weights", where), where + "/weights"), where + "/weights");
  const json& means = need(j, "means", where);
  const std::string mwhere = where + "/means";
  if (means.is_array() && !means.empty() && means[0].is_array()) {
    mix.means = as_matrix(means, mwhere);
  } else {
    // flat list reads as one-dimensional component means
    const Eigen::VectorXd flat = as_vector(means, mwhere);
    mix.means = flat;
  }
  if (mix.means.rows() != mix.weights.size()) {
    fail(mwhere, "expected one mean per component");
  }
  const json& vars = need(j, "variances", where);
  const std::string vwhere = where + "/variances";
  if (vars.is_number()) {
    mix.variances =
        Eigen::VectorXd::Constant(mix.weights.size(), as_number(vars, vwhere));
  } else {
    mix.variances = as_vector(vars, vwhere);
  }
  if (mix.variances.size() != mix.weights.size()) {
    fail(vwhere, "expected one variance per component");
  }
  for (Eigen::Index c = 0; c < mix.variances.size(); ++c) {
    if (!(mix.variances[c] > 0.0)) {
      fail(vwhere + "/" + std::to_string(c), "variances must be positive");
    }
  }
  return mix;
}

AnnealSchedule parse_schedule(const json& j, const std::string& where) {
  need_object(j, where);
  check_keys(j, where,
             {"sigma_start", "sigma_end", "total_steps", "steps_per_level", "gamma_end"});
  AnnealSchedule s;
  if (const json* v = find(j, "sigma_start")) s.sigma_start = as_number(*v, where + "/sigma_start");
  if (const json* v = find(j, "sigma_end")) s.sigma_end = as_number(*v, where + "/sigma_end");
  if (const json* v = find(j, "total_steps")) {
    s.total_steps = static_cast<long>(as_integer(*v, where + "/total_steps"));
  }
  if (const json* v = find(j, "steps_per_level")) {
    s.steps_per_level = static_cast<int>(as_integer(*v, where + "/steps_per_level"));
  }
  if (const json* v = find(j, "gamma_end")) s.gamma_end = as_number(*v, where + "/gamma_end");
  return s;
}

LangevinScenario parse_langevin(const json& j, const std::string& where) {
  need_object(j, where);
  check_keys(j, where, {"mixture", "channel", "y", "schedule", "chains", "split"});
  LangevinScenario run;
  run.mixture = parse_mixture(need(j, "mixture", where), where + "/mixture");
  const Channel chan =
      parse_channel(need(j, "channel", where), where + "/channel", -1);
  if (!std::holds_alternative<GaussianLinearChannel>(chan)) {
    fail(where + "/channel", "expected a gaussian channel");
  }
  run.channel = std::get<GaussianLinearChannel>(chan);
  run.y = as_vector(need(j, "y", where), where + "/y");
  if (run.y.size() != run.channel.A.rows()) {
    fail(where + "/y", "expected one entry per measurement row");
  }
  if (run.channel.A.cols() != run.mixture.dimension()) {
    fail(where + "/channel", "measurement columns must match the mixture dimension");
  }
  if (const json* sch = find(j, "schedule")) {
    run.schedule = parse_schedule(*sch, where + "/schedule");
  }
  if (const json* c = find(j, "chains")) {
    const long long chains = as_integer(*c, where + "/chains");
    if (chains < 1) fail(where + "/chains", "need at least one chain");
    run.chains = static_cast<long>(chains);
  }
  if (const json* sp = find(j, "split")) {
    const std::string swhere = where + "/split";
    need_object(*sp, swhere);
    check_keys(*sp, swhere, {"dim", "threshold"});
    run.split_threshold = as_number(need(*sp, "threshold", swhere), swhere + "/threshold");
    if (const json* d = find(*sp, "dim")) {
      const long long dim = as_integer(*d, swhere + "/dim");
      if (dim < 0 || dim >= run.mixture.dimension()) {
        fail(swhere + "/dim", "coordinate out of range");
      }
      run.split_dim = static_cast<int>(dim);
    }
  }
  return run;
}

CountsTable parse_counts(const json& j, const std::string& where) {
  need_object(j, where);
  check_keys(j, where, {"groups", "table"});
  CountsTable counts;
  const json& names = need(j, "groups", where);
  if (!names.is_array() || names.empty()) {
    fail(where + "/groups", "expected a nonempty array of group names");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    counts.group_names.push_back(as_string(names[i], where + "/groups/" + std::to_string(i)));
  }
  counts.table = as_matrix(need(j, "table", where), where + "/table");
  const auto ng = static_cast<Eigen::Index>(counts.group_names.size());
  if (counts.table.rows() != ng || counts.table.cols() != ng) {
    fail(where + "/table", "expected a square matrix matching the group list");
  }
  return counts;
}

ReweightOptions parse_reweight(const json& j, const std::string& where) {
  need_object(j, where);
  check_keys(j, where, {"tolerance", "max_iterations", "damping", "truth"});
  ReweightOptions opts;
  if (const json* v = find(j, "tolerance")) {
    opts.tol = as_number(*v, where + "/tolerance");
    if (!(opts.tol > 0.0)) fail(where + "/tolerance", "tolerance must be positive");
  }
  if (const json* v = find(j, "max_iterations")) {
    const long long n = as_integer(*v, where + "/max_iterations");
    if (n < 0) fail(where + "/max_iterations", "must be nonnegative");
    opts.max_iterations = static_cast<int>(n);
  }
  if (const json* v = find(j, "damping")) {
    opts.damping = as_number(*v, where + "/damping");
    if (!(opts.damping > 0.0) || opts.damping > 1.0) {
      fail(where + "/damping", "damping must lie in (0, 1]");
    }
  }
  if (const json* v = find(j, "truth")) {
    const std::string mode = as_string(*v, where + "/truth");
    if (mode == "reweighted") {
      opts.mode = TruthMode::kReweighted;
    } else if (mode == "original") {
      opts.mode = TruthMode::kOriginal;
    } else {
      fail(where + "/truth", "expected 'reweighted' or 'original'");
    }
  }
  return opts;
}

}  // namespace

Scenario parse_scenario(const json& j, const std::string& default_name) {
  need_object(j, "/");
  check_keys(j, "", {"name", "seed", "model", "groups", "channel", "kernel", "audit",
                     "counts", "reweight", "langevin"});
  Scenario s;
  s.name = default_name;
  if (const json* v = find(j, "name")) s.name = as_string(*v, "/name");
  if (const json* v = find(j, "seed")) {
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<long long>() < 0)) {
      fail("/seed", "expected a nonnegative integer");
    }
    s.seed = v->get<std::uint64_t>();
  }
  if (const json* v = find(j, "model")) s.model = parse_model(*v, "/model");
  if (const json* v = find(j, "groups")) {
    if (!s.model) fail("/groups", "groups require a model");
    s.groups = parse_groups(*v, "/groups", s.model->num_states());
  }
  if (const json* v = find(j, "channel")) {
    s.channel = parse_channel(*v, "/channel", s.model ? s.model->num_states() : -1);
  }
  if (const json* v = find(j, "kernel")) {
    if (!s.model) fail("/kernel", "kernels require a model");
    const DiscreteChannel* disc = nullptr;
    if (s.channel && std::holds_alternative<DiscreteChannel>(*s.channel)) {
      disc = &std::get<DiscreteChannel>(*s.channel);
    }
    s.kernel = parse_kernel(*v, "/kernel", *s.model, disc);
  }
  if (const json* v = find(j, "audit")) {
    need_object(*v, "/audit");
    check_keys(*v, "/audit", {"samples", "significance"});
    s.has_audit = true;
    if (const json* n = find(*v, "samples")) {
      s.audit_samples = as_integer(*n, "/audit/samples");
      if (s.audit_samples < 1) fail("/audit/samples", "need at least one sample");
    }
    if (const json* sig = find(*v, "significance")) {
      s.significance = as_number(*sig, "/audit/significance");
      if (!(s.significance > 0.0) || !(s.significance < 1.0)) {
        fail("/audit/significance", "significance must lie in (0, 1)");
      }
    }
  }
  if (const json* v = find(j, "counts")) s.counts = parse_counts(*v, "/counts");
  if (const json* v = find(j, "reweight")) s.reweight = parse_reweight(*v, "/reweight");
  if (const json* v = find(j, "langevin")) s.langevin = parse_langevin(*v, "/langevin");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path, "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError(path + ":" + std::to_string(line) + ":" + std::to_string(col),
                      e.what());
  }
  std::string stem = path;
  if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos) {
    stem = stem.substr(slash + 1);
  }
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) {
    stem = stem.substr(0, dot);
  }
  try {
    return parse_scenario(j, stem.empty() ? "scenario" : stem);
  } catch (const SchemaError& e) {
    const std::string msg = std::string(e.what()).substr(e.where().size() + 2);
    throw SchemaError(path + e.where(), msg);
  }
}

json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  return v;
}

json json_vector(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
  return a;
}

json json_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(json_number(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const MetricsReport& report) {
  json j;
  j["groups"] = report.group_names;
  j["joint_recon_by_truth"] = json_matrix(report.joint.joint);
  j["truth_mass"] = json_vector(report.joint.truth_mass);
  j["recon_mass"] = json_vector(report.joint.recon_mass);
  j["rdp"] = {{"alpha", json_vector(report.rdp.alpha)}, {"gap", json_number(report.rdp.gap)}};
  j["pr"] = {{"per_group", json_vector(report.pr.per_group)},
             {"max_gap", json_number(report.pr.max_gap)}};
  if (report.cpr) {
    json per = json::array();
    for (const double g : report.cpr->per_symbol) per.push_back(json_number(g));
    j["cpr"] = {{"per_symbol", std::move(per)},
                {"sup_gap", json_number(report.cpr->sup_gap)},
                {"skipped_symbols", report.cpr->skipped}};
  }
  j["spe_gap"] = json_number(report.spe);
  if (report.rce_value) j["rce"] = json_number(*report.rce_value);
  if (report.rce_parts) {
    j["rce_decomposition"] = {
        {"conditional_entropy", json_number(report.rce_parts->conditional_entropy)},
        {"kl", json_number(report.rce_parts->kl)},
        {"total", json_number(report.rce_parts->total)}};
  }
  return j;
}

json to_json(const AuditReport& report) {
  json j;
  j["groups"] = report.group_names;
  j["counts_truth_by_recon"] = json_matrix(report.counts);
  j["samples"] = report.samples;
  j["significance"] = json_number(report.significance);
  json pairs = json::array();
  for (const AuditPair& p : report.pairs) {
    json t;
    t["group_a"] = report.group_names[static_cast<std::size_t>(p.group_i)];
    t["group_b"] = report.group_names[static_cast<std::size_t>(p.group_j)];
    t["errors_on_a"] = p.test.count_ij;
    t["errors_on_b"] = p.test.count_ji;
    t["estimate"] = json_number(p.test.estimate);
    t["ci_low"] = json_number(p.test.ci.low);
    t["ci_high"] = json_number(p.test.ci.high);
    t["p_value"] = json_number(p.test.p_value);
    t["reject"] = p.test.reject;
    t["indeterminate"] = p.test.indeterminate;
    pairs.push_back(std::move(t));
  }
  j["pairs"] = std::move(pairs);
  j["any_reject"] = report.any_reject;
  j["multiple_testing_warning"] = report.multiple_testing_warning;
  return j;
}

json to_json(const ReweightResult& result, const std::vector<std::string>& group_names) {
  json j;
  j["groups"] = group_names;
  j["lambda"] = json_vector(result.lambda);
  j["alpha"] = json_vector(result.alpha);
  j["ratio"] = json_number(result.ratio);
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["monotonicity_violations"] = result.monotonicity_violations;
  json trace = json::array();
  for (const ReweightIterate& it : result.trace) {
    trace.push_back({{"iteration", it.iteration},
                     {"lambda", json_vector(it.lambda)},
                     {"alpha", json_vector(it.alpha)},
                     {"ratio", json_number(it.ratio)}});
  }
  j["trace"] = std::move(trace);
  return j;
}

json run_langevin_scenario(const LangevinScenario& scenario, std::uint64_t seed) {
  require_valid(scenario.mixture);
  scenario.schedule.check();
  if (scenario.chains < 1) throw ValidationError("langevin: need at least one chain");
  const Eigen::MatrixXd draws =
      langevin_sample_many(scenario.mixture, scenario.channel, scenario.y,
                           scenario.schedule, seed, scenario.chains);
  const Eigen::Index n = draws.rows();
  const Eigen::Index d = draws.cols();
  const Eigen::VectorXd mean = draws.colwise().mean();
  Eigen::VectorXd sd = Eigen::VectorXd::Zero(d);
  if (n > 1) {
    sd = ((draws.rowwise() - mean.transpose()).colwise().squaredNorm() /
          static_cast<double>(n - 1))
             .cwiseSqrt()
             .transpose();
  }
  const Eigen::VectorXd se = sd / std::sqrt(static_cast<double>(n));
  json j;
  j["chains"] = static_cast<long long>(n);
  j["dimension"] = static_cast<long long>(d);
  j["seed"] = seed;
  j["mean"] = json_vector(mean);
  j["stddev"] = json_vector(sd);
  j["standard_error"] = json_vector(se);
  if (scenario.split_threshold) {
    const double thr = *scenario.split_threshold;
    long long above = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (draws(r, scenario.split_dim) > thr) ++above;
    }
    j["split"] = {{"dim", scenario.split_dim},
                  {"threshold", json_number(thr)},
                  {"fraction_above",
                   json_number(static_cast<double>(above) / static_cast<double>(n))}};
  }
  return j;
}

void write_counts_csv(std::ostream& os, const AuditReport& report) {
  os << "group";
  for (const auto& name : report.group_names) os << "," << name;
  os << "\n";
  for (Eigen::Index i = 0; i < report.counts.rows(); ++i) {
    os << report.group_names[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < report.counts.cols(); ++k) {
      os << "," << static_cast<long long>(std::llround(report.counts(i, k)));
    }
    os << "\n";
  }
}

void write_pairs_csv(std::ostream& os, const AuditReport& report) {
  os << std::setprecision(17);
  os << "group_a,group_b,errors_on_a,errors_on_b,estimate,ci_low,ci_high,p_value,"
        "reject,indeterminate\n";
  for (const AuditPair& p : report.pairs) {
    os << report.group_names[static_cast<std::size_t>(p.group_i)] << ","
       << report.group_names[static_cast<std::size_t>(p.group_j)] << ","
       << p.test.count_ij << "," << p.test.count_ji << "," << p.test.estimate << ","
       << p.test.ci.low << "," << p.test.ci.high << "," << p.test.p_value << ","
       << (p.test.reject ? "true" : "false") << ","
       << (p.test.indeterminate ? "true" : "false") << "\n";
  }
}

void write_trace_csv(std::ostream& os, const ReweightResult& result,
                     const std::vector<std::string>& group_names) {
  os << std::setprecision(17);
  os << "iteration,ratio";
  for (const auto& g : group_names) os << ",lambda_" << g;
  for (const auto& g : group_names) os << ",alpha_" << g;
  os << "\n";
  for (const ReweightIterate& it : result.trace) {
    os << it.iteration << "," << it.ratio;
    for (Eigen::Index i = 0; i < it.lambda.size(); ++i) os << "," << it.lambda[i];
    for (Eigen::Index i = 0; i < it.alpha.size(); ++i) os << "," << it.alpha[i];
    os << "\n";
  }
}

}  // namespace fairrec
