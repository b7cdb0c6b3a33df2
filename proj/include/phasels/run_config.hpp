#pragma once

#include <filesystem>
#include <string>

#include "phasels/harness.hpp"

namespace phasels {

/// Sweep configuration read from a flat `key = value` file ('#' starts a
/// comment). Unknown or repeated keys are errors; every key except `seed`
/// has a default:
///
///   d            = 10                      comma list allowed
///   m_list       = 64,128,256,512,1024,2048,4096
///   s_list       = (empty: dense signals)
///   noise.kind   = fixed_norm              zero | iid_gaussian | fixed_norm | constant
///   noise.param  = 1
///   solver       = error_reduction
///   lambda.rule  = paper                   paper | conjecture | fixed
///   lambda.c     = 1                       constant for paper / conjecture
///   lambda.value = 0                       lambda for the fixed rule
///   R.rule       = oracle_l1_norm          oracle_l1_norm | fixed
///   R.value      = 0
///   trials       = 50
///   restarts     = 5
///   max_iters    = 1000
///   x0_norm      = 1
///   threads      = 0                       0 = hardware concurrency
///   out.records  = records.csv
///   out.plots    = plot.dat
struct RunConfig {
  ExperimentPlan plan;
  std::filesystem::path records_path = "records.csv";
  std::filesystem::path plots_path = "plot.dat";
  int threads = 0;
};

/// Throws Error(kParse) with "line N: ..." for malformed lines, unknown keys
/// and bad values, and for a missing `seed`.
RunConfig ParseRunConfig(const std::string& text);
RunConfig LoadRunConfig(const std::filesystem::path& path);

}  // namespace phasels
