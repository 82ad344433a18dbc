#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairrec/errors.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/model.hpp"
#include "fairrec/reweight.hpp"
#include "fairrec/scenario.hpp"
#include "fairrec/stats.hpp"
#include "fairrec/verify.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;    // bad invocation, malformed or invalid scenario
constexpr int kExitRuntime = 3;  // valid inputs hitting a runtime precondition

struct Options {
  std::string scenario_path;
  std::string out_dir;  // empty: print to stdout only
  std::string format = "json";
  std::string suite;
  std::optional<std::uint64_t> seed;
  std::optional<long long> samples;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fairrec::PreconditionError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw fairrec::PreconditionError("failed writing " + path.string());
}

fs::path out_file(const Options& opts, const std::string& name, const char* suffix) {
  return fs::path(opts.out_dir) / (name + suffix);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

const fairrec::DiscreteModel& need_model(const fairrec::Scenario& sc) {
  if (!sc.model) throw fairrec::SchemaError("/model", "this command needs a model");
  return *sc.model;
}

const fairrec::GroupCollection& need_groups(const fairrec::Scenario& sc) {
  if (!sc.groups) throw fairrec::SchemaError("/groups", "this command needs groups");
  return *sc.groups;
}

const fairrec::DiscreteChannel& need_discrete_channel(const fairrec::Scenario& sc) {
  if (!sc.channel) throw fairrec::SchemaError("/channel", "this command needs a channel");
  const auto* chan = std::get_if<fairrec::DiscreteChannel>(&*sc.channel);
  if (!chan) throw fairrec::SchemaError("/channel", "this command needs a discrete channel");
  return *chan;
}

const fairrec::ReconstructionKernel& need_kernel(const fairrec::Scenario& sc) {
  if (!sc.kernel) throw fairrec::SchemaError("/kernel", "this command needs a kernel");
  return *sc.kernel;
}

int cmd_metrics(const Options& opts) {
  const fairrec::Scenario sc = fairrec::load_scenario(opts.scenario_path);
  fairrec::MetricsReport report;
  if (sc.counts) {
    report = fairrec::empirical_from_counts(sc.counts->table, sc.counts->group_names);
  } else {
    report = fairrec::compute_metrics(need_model(sc), need_discrete_channel(sc),
                                      need_kernel(sc), need_groups(sc));
  }
  json j = fairrec::to_json(report);
  j["name"] = sc.name;
  std::ostringstream confusion;
  fairrec::write_confusion_csv(confusion, report.joint);
  if (opts.format == "csv") {
    std::cout << confusion.str();
  } else {
    std::cout << dump(j);
  }
  if (!opts.out_dir.empty()) {
    write_text(out_file(opts, sc.name, ".metrics.json"), dump(j));
    write_text(out_file(opts, sc.name, ".confusion.csv"), confusion.str());
  }
  return kExitOk;
}

int cmd_audit(const Options& opts) {
  const fairrec::Scenario sc = fairrec::load_scenario(opts.scenario_path);
  const std::uint64_t seed = opts.seed.value_or(sc.seed);
  fairrec::AuditReport report;
  json j;
  if (sc.counts) {
    report = fairrec::audit_from_counts(sc.counts->table, sc.counts->group_names,
                                        sc.significance);
    j = fairrec::to_json(report);
  } else {
    const long long samples = opts.samples.value_or(sc.audit_samples);
    if (samples < 1) {
      throw fairrec::SchemaError("/audit/samples",
                                 "need a positive sample count (scenario or --samples)");
    }
    report = fairrec::simulate_audit(need_model(sc), need_discrete_channel(sc),
                                     need_kernel(sc), need_groups(sc), samples, seed,
                                     sc.significance);
    j = fairrec::to_json(report);
    j["seed"] = seed;
  }
  j["name"] = sc.name;
  std::ostringstream counts_csv, pairs_csv;
  fairrec::write_counts_csv(counts_csv, report);
  fairrec::write_pairs_csv(pairs_csv, report);
  if (opts.format == "csv") {
    std::cout << pairs_csv.str();
  } else {
    std::cout << dump(j);
  }
  if (!opts.out_dir.empty()) {
    write_text(out_file(opts, sc.name, ".audit.json"), dump(j));
    write_text(out_file(opts, sc.name, ".counts.csv"), counts_csv.str());
    write_text(out_file(opts, sc.name, ".pairs.csv"), pairs_csv.str());
  }
  return kExitOk;
}

int cmd_reweight(const Options& opts) {
  const fairrec::Scenario sc = fairrec::load_scenario(opts.scenario_path);
  const fairrec::ReweightOptions ropts = sc.reweight.value_or(fairrec::ReweightOptions{});
  const fairrec::GroupCollection& groups = need_groups(sc);
  const fairrec::ReweightResult result =
      fairrec::solve_rdp_weights(need_model(sc), need_discrete_channel(sc), groups, ropts);
  std::vector<std::string> names;
  for (const auto& g : groups.groups) names.push_back(g.name);
  json j = fairrec::to_json(result, names);
  j["name"] = sc.name;
  std::ostringstream trace;
  fairrec::write_trace_csv(trace, result, names);
  if (opts.format == "csv") {
    std::cout << trace.str();
  } else {
    std::cout << dump(j);
  }
  if (!opts.out_dir.empty()) {
    write_text(out_file(opts, sc.name, ".reweight.json"), dump(j));
    write_text(out_file(opts, sc.name, ".trace.csv"), trace.str());
  }
  return kExitOk;
}

int cmd_verify(const Options& opts) {
  const fairrec::SuiteResult result =
      fairrec::run_verify_suite(opts.suite, opts.seed.value_or(0));
  std::cout << dump(result.report);
  if (!opts.out_dir.empty()) {
    write_text(out_file(opts, opts.suite, ".verify.json"), dump(result.report));
  }
  return kExitOk;
}

int cmd_langevin(const Options& opts) {
  const fairrec::Scenario sc = fairrec::load_scenario(opts.scenario_path);
  if (!sc.langevin) {
    throw fairrec::SchemaError("/langevin", "this command needs a langevin section");
  }
  fairrec::LangevinScenario run = *sc.langevin;
  if (opts.samples) run.chains = static_cast<long>(*opts.samples);
  const std::uint64_t seed = opts.seed.value_or(sc.seed);
  json j = fairrec::run_langevin_scenario(run, seed);
  j["name"] = sc.name;
  std::cout << dump(j);
  if (!opts.out_dir.empty()) {
    write_text(out_file(opts, sc.name, ".langevin.json"), dump(j));
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, Options& opts, bool scenario, bool seed, bool samples,
                bool format) {
  if (scenario) {
    cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
  }
  cmd->add_option("--out", opts.out_dir, "directory for report files")
      ->check(CLI::ExistingDirectory);
  if (seed) cmd->add_option("--seed", opts.seed, "override the scenario seed");
  if (samples) {
    cmd->add_option("--samples", opts.samples, "override the sample or chain count")
        ->check(CLI::Range(1LL, std::numeric_limits<long long>::max()));
  }
  if (format) {
    cmd->add_option("--format", opts.format, "stdout format")
        ->check(CLI::IsMember({"json", "csv"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posterior-sampling fairness diagnostics"};
  app.require_subcommand(1);
  Options opts;

  CLI::App* metrics = app.add_subcommand(
      "metrics", "exact or counts-based group metrics for a scenario");
  add_common(metrics, opts, true, false, false, true);

  CLI::App* audit = app.add_subcommand(
      "audit", "sampled or counts-based symmetry audit with exact binomial tests");
  add_common(audit, opts, true, true, true, true);

  CLI::App* reweight =
      app.add_subcommand("reweight", "solve for equal-accuracy prior weights");
  add_common(reweight, opts, true, false, false, true);

  CLI::App* verify =
      app.add_subcommand("verify", "run a named numerical verification suite");
  verify->add_option("suite", opts.suite, "suite name")
      ->required()
      ->check(CLI::IsMember(fairrec::verify_suite_names()));
  add_common(verify, opts, false, true, false, false);

  CLI::App* langevin =
      app.add_subcommand("langevin", "annealed Langevin posterior sampling run");
  add_common(langevin, opts, true, true, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (metrics->parsed()) return cmd_metrics(opts);
    if (audit->parsed()) return cmd_audit(opts);
    if (reweight->parsed()) return cmd_reweight(opts);
    if (verify->parsed()) return cmd_verify(opts);
    if (langevin->parsed()) return cmd_langevin(opts);
  } catch (const fairrec::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fairrec::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
