#include "phasels/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "phasels/errors.hpp"

namespace phasels {

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T ParseNumber(const std::string& value, int line, const std::string& key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": bad value '" + value +
                                "' for key '" + key + "'");
  }
  return out;
}

std::vector<int> ParseIntList(const std::string& value, int line, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ParseNumber<int>(Trim(item), line, key));
  return out;
}

}  // namespace

RunConfig ParseRunConfig(const std::string& text) {
  RunConfig cfg;
  ExperimentPlan& plan = cfg.plan;
  plan.d_values = {10};
  plan.m_values = {64, 128, 256, 512, 1024, 2048, 4096};
  plan.noise = noise::FixedNorm{1.0};
  plan.trials = 50;
  plan.restarts = 5;

  std::string noise_kind = "fixed_norm";
  double noise_param = 1.0;
  int noise_line = 0;
  LambdaRule lambda;
  RadiusRule radius;
  bool have_seed = false;

  using Setter = std::function<void(const std::string&, int, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"d", [&](auto& v, int l, auto& k) { plan.d_values = ParseIntList(v, l, k); }},
      {"m_list", [&](auto& v, int l, auto& k) { plan.m_values = ParseIntList(v, l, k); }},
      {"s_list",
       [&](auto& v, int l, auto& k) {
         if (v.empty()) {
           plan.s_values.reset();
         } else {
           plan.s_values = ParseIntList(v, l, k);
         }
       }},
      {"noise.kind",
       [&](auto& v, int l, auto&) {
         noise_kind = v;
         noise_line = l;
       }},
      {"noise.param", [&](auto& v, int l, auto& k) { noise_param = ParseNumber<double>(v, l, k); }},
      {"solver",
       [&](auto& v, int l, auto&) {
         try {
           plan.solver = ParseSolverKind(v);
         } catch (const Error& e) {
           Fail(ErrorCode::kParse, "line " + std::to_string(l) + ": " + e.what());
         }
       }},
      {"lambda.rule",
       [&](auto& v, int l, auto&) {
         if (v == "paper") {
           lambda.kind = LambdaRule::Kind::kPaper;
         } else if (v == "conjecture") {
           lambda.kind = LambdaRule::Kind::kConjecture;
         } else if (v == "fixed") {
           lambda.kind = LambdaRule::Kind::kFixed;
         } else {
           Fail(ErrorCode::kParse, "line " + std::to_string(l) + ": unknown lambda.rule '" + v + "'");
         }
       }},
      {"lambda.c", [&](auto& v, int l, auto& k) { lambda.value = ParseNumber<double>(v, l, k); }},
      {"lambda.value",
       [&](auto& v, int l, auto& k) { lambda.value = ParseNumber<double>(v, l, k); }},
      {"R.rule",
       [&](auto& v, int l, auto&) {
         if (v == "oracle_l1_norm") {
           radius.kind = RadiusRule::Kind::kOracleL1Norm;
         } else if (v == "fixed") {
           radius.kind = RadiusRule::Kind::kFixed;
         } else {
           Fail(ErrorCode::kParse, "line " + std::to_string(l) + ": unknown R.rule '" + v + "'");
         }
       }},
      {"R.value", [&](auto& v, int l, auto& k) { radius.value = ParseNumber<double>(v, l, k); }},
      {"trials", [&](auto& v, int l, auto& k) { plan.trials = ParseNumber<int>(v, l, k); }},
      {"seed",
       [&](auto& v, int l, auto& k) {
         plan.master_seed = ParseNumber<std::uint64_t>(v, l, k);
         have_seed = true;
       }},
      {"restarts", [&](auto& v, int l, auto& k) { plan.restarts = ParseNumber<int>(v, l, k); }},
      {"max_iters", [&](auto& v, int l, auto& k) { plan.max_iters = ParseNumber<int>(v, l, k); }},
      {"x0_norm", [&](auto& v, int l, auto& k) { plan.x0_norm = ParseNumber<double>(v, l, k); }},
      {"threads", [&](auto& v, int l, auto& k) { cfg.threads = ParseNumber<int>(v, l, k); }},
      {"out.records", [&](auto& v, int, auto&) { cfg.records_path = v; }},
      {"out.plots", [&](auto& v, int, auto&) { cfg.plots_path = v; }},
  };

  std::set<std::string> seen;
  std::stringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string content = Trim(raw);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = Trim(content.substr(0, eq));
    const std::string value = Trim(content.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    it->second(value, line, key);
  }
  if (!have_seed) Fail(ErrorCode::kParse, "missing required key 'seed'");

  if (noise_kind == "zero") {
    plan.noise = noise::Zero{};
  } else if (noise_kind == "iid_gaussian") {
    plan.noise = noise::IidGaussian{noise_param};
  } else if (noise_kind == "fixed_norm") {
    plan.noise = noise::FixedNorm{noise_param};
  } else if (noise_kind == "constant") {
    plan.noise = noise::Constant{noise_param};
  } else {
    Fail(ErrorCode::kParse,
         "line " + std::to_string(noise_line) + ": unknown noise.kind '" + noise_kind + "'");
  }
  if (IsRegularizedSolver(plan.solver)) plan.lambda_rule = lambda;
  if (IsConstrainedSolver(plan.solver)) plan.radius_rule = radius;
  try {
    ValidatePlan(plan);
  } catch (const Error& e) {
    Fail(ErrorCode::kParse, std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseRunConfig(buffer.str());
}

}  // namespace phasels
