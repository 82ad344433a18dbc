#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace fairrec {

struct SuiteResult {
  bool pass = false;
  nlohmann::json report;
};

// Names accepted by run_verify_suite, in documentation order.
std::vector<std::string> verify_suite_names();

/*
 * Self-contained numerical checks, each reporting pass/fail plus a JSON
 * record of every trial:
 *   case1          exact symmetry of the reconstruction joint when the
 *                  sampler's prior matches the data prior
 *   case2          |q_UV - q_VU| <= 2 TV(R, P) under prior mismatch
 *   case3          the same gap against 4 * delta_eff on 1-D grids with
 *                  shift couplings and block-Gaussian channels
 *   oblivious-rdp  certified positive lower bound for the joint accuracy
 *                  gap on the three-state shared-symbol fixture, with
 *                  identity and separable channels as zero controls
 *   rdp-pr         exhaustive (rdp, pr) sweep showing no kernel is
 *                  simultaneously below both cuts on the cat/dog fixture,
 *                  with identity and near-perfect controls
 * Throws ValidationError for an unknown suite name.
 */
SuiteResult run_verify_suite(const std::string& suite, std::uint64_t seed);

}  // namespace fairrec
