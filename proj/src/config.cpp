#include "dlasso/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dlasso/error.h"

namespace dlasso {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(ErrorCode::kParseError, "config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) fail(line, "not a number: '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    fail(line, "not a number: '" + v + "'");
  }
}

long long to_int(const std::string& v, int line) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    fail(line, "not an integer: '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& v, int line) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    fail(line, "not an unsigned integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v, int line) {
  const std::string l = lower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  fail(line, "not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"instance.construction",
       [](ExperimentConfig& c, const std::string& v, int) { c.instance.construction = v; }},
      {"instance.p",
       [](ExperimentConfig& c, const std::string& v, int l) { c.instance.p = to_int(v, l); }},
      {"instance.sigma_minus",
       [](ExperimentConfig& c, const std::string& v, int) { c.instance.sigma_minus = v; }},
      {"instance.rho",
       [](ExperimentConfig& c, const std::string& v, int l) { c.instance.rho = to_double(v, l); }},
      {"instance.lambda_sharp",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.instance.lambda_sharp = to_double(v, l);
       }},
      {"instance.improvement",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.instance.improvement = to_double(v, l);
       }},
      {"instance.s",
       [](ExperimentConfig& c, const std::string& v, int l) { c.instance.s = to_int(v, l); }},
      {"instance.gamma_sharp_value",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.instance.gamma_sharp_value = to_double(v, l);
       }},
      {"instance.big_n",
       [](ExperimentConfig& c, const std::string& v, int l) { c.instance.big_n = to_int(v, l); }},
      {"instance.t",
       [](ExperimentConfig& c, const std::string& v, int l) { c.instance.t = to_double(v, l); }},
      {"instance.seed",
       [](ExperimentConfig& c, const std::string& v, int l) { c.instance.seed = to_u64(v, l); }},
      {"instance.margin",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.instance.options.margin = to_double(v, l);
       }},
      {"instance.eps_eligible",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.instance.options.eps_eligible = to_double(v, l);
       }},
      {"instance.sparse_cap",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.instance.options.sparse_cap = to_double(v, l);
       }},
      {"experiment.n", [](ExperimentConfig& c, const std::string& v, int l) { c.n = to_int(v, l); }},
      {"experiment.replicates",
       [](ExperimentConfig& c, const std::string& v, int l) { c.replicates = to_int(v, l); }},
      {"experiment.estimators",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.estimators.clear();
         for (const auto& e : split_list(v)) {
           if (e == "known" || e == "known_sigma") {
             c.estimators.push_back(EstimatorKind::kKnown);
           } else if (e == "unknown" || e == "unknown_sigma") {
             c.estimators.push_back(EstimatorKind::kUnknown);
           } else {
             fail(l, "unknown estimator '" + e + "'");
           }
         }
       }},
      {"experiment.alpha",
       [](ExperimentConfig& c, const std::string& v, int l) { c.alpha = to_double(v, l); }},
      {"experiment.master_seed",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.master_seed = to_u64(v, l);
         c.master_seed_set = true;
       }},
      {"experiment.threads",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.threads = static_cast<int>(to_int(v, l));
       }},
      {"lambda.lambda_c",
       [](ExperimentConfig& c, const std::string& v, int l) { c.lambda_c = to_double(v, l); }},
      {"lambda.lambda_node_factor",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.lambda_node_factor = to_double(v, l);
       }},
      {"lambda.t", [](ExperimentConfig& c, const std::string& v, int l) { c.t = to_double(v, l); }},
      {"beta0.s0",
       [](ExperimentConfig& c, const std::string& v, int l) { c.beta0.s0 = to_int(v, l); }},
      {"beta0.magnitudes",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.beta0.magnitudes.clear();
         for (const auto& e : split_list(v)) c.beta0.magnitudes.push_back(to_double(e, l));
       }},
      {"beta0.scaled",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.beta0.scaled.clear();
         for (const auto& e : split_list(v)) c.beta0.scaled.push_back(to_bool(e, l));
       }},
      {"beta0.eta",
       [](ExperimentConfig& c, const std::string& v, int l) { c.beta0.eta = to_double(v, l); }},
      {"class.kind",
       [](ExperimentConfig& c, const std::string& v, int l) {
         const std::string k = lower(v);
         if (k == "l0") {
           c.model_class.kind = ClassKind::kL0;
         } else if (k == "l1") {
           c.model_class.kind = ClassKind::kL1;
         } else if (k == "lr") {
           c.model_class.kind = ClassKind::kLr;
         } else {
           fail(l, "unknown class '" + v + "'");
         }
       }},
      {"class.r",
       [](ExperimentConfig& c, const std::string& v, int l) { c.model_class.r = to_double(v, l); }},
      {"class.s",
       [](ExperimentConfig& c, const std::string& v, int l) { c.model_class.s = to_double(v, l); }},
      {"class.m",
       [](ExperimentConfig& c, const std::string& v, int l) { c.model_class.m = to_double(v, l); }},
      {"audit.replicates",
       [](ExperimentConfig& c, const std::string& v, int l) { c.audit_replicates = to_int(v, l); }},
      {"audit.pairs",
       [](ExperimentConfig& c, const std::string& v, int l) { c.audit_pairs = to_int(v, l); }},
      {"audit.re_eta",
       [](ExperimentConfig& c, const std::string& v, int l) { c.re_eta = to_double(v, l); }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  if (c.replicates < 1) throw Error(ErrorCode::kParseError, "replicates must be >= 1");
  if (c.n < 4) throw Error(ErrorCode::kParseError, "n must be >= 4");
  if (c.instance.p < 2) throw Error(ErrorCode::kParseError, "p must be >= 2");
  if (c.estimators.empty()) throw Error(ErrorCode::kParseError, "no estimators");
  if (c.beta0.magnitudes.empty()) throw Error(ErrorCode::kParseError, "beta0 grid is empty");
  if (c.beta0.scaled.size() > c.beta0.magnitudes.size()) {
    throw Error(ErrorCode::kParseError, "beta0.scaled is longer than beta0.magnitudes");
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw Error(ErrorCode::kParseError, "alpha not in (0,1)");
  if (c.threads < 1) throw Error(ErrorCode::kParseError, "threads must be >= 1");
}

}  // namespace

ExperimentConfig parse_config_string(const std::string& text) {
  ExperimentConfig cfg;
  cfg.model_class.n = cfg.n;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header");
      section = lower(trim(s.substr(1, s.size() - 2)));
      static const char* kSections[] = {"instance", "experiment", "lambda", "beta0", "class",
                                        "audit"};
      if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections)) {
        fail(line, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    if (section.empty()) fail(line, "key outside of a section");
    const std::string key = section + "." + lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) fail(line, "unknown key '" + key + "'");
    if (value.empty()) fail(line, "empty value for '" + key + "'");
    it->second(cfg, value, line);
  }
  cfg.model_class.n = cfg.n;
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

}  // namespace dlasso
