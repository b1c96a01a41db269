#include "htp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace htp {

namespace {

const std::vector<std::string> k_law_keys = {"family", "alpha", "p", "n_max", "tail_const", "cutoff", "file"};
const std::vector<std::string> k_output_keys = {"path", "seed"};
const std::vector<std::string> k_tol_keys = {"abs", "ladder"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool contains(const std::vector<std::string>& v, const std::string& k) {
  return std::find(v.begin(), v.end(), k) != v.end();
}

double to_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw ConfigError("bad number for " + what + ": '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw ConfigError("bad integer for " + what + ": '" + s + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"potential", "functionals", "conditions", "exit-prob",
                                                 "ladder",    "simulate",    "reproduce"};
  return names;
}

const std::vector<std::string>& task_keys(const std::string& task) {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"potential", {"x_grid", "method"}},
      {"functionals", {"x_grid", "t_grid", "eps"}},
      {"conditions", {"x_max"}},
      {"exit-prob", {"x", "y", "Q", "R", "replicas", "budget"}},
      {"ladder", {"horizon", "mode", "replicas"}},
      {"simulate", {"event", "replicas", "budget"}},
      {"reproduce", {"suite"}},
  };
  auto it = keys.find(task);
  if (it == keys.end()) throw ConfigError("unknown task: " + task);
  return it->second;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!contains({"law", "task", "output", "tolerance"}, section))
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    auto dup = [&](bool d) {
      if (d) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
    };
    if (section == "law") {
      dup(c.law.count(key) > 0);
      c.law[key] = val;
    } else if (section == "task") {
      if (key == "name") {
        dup(!c.task.empty());
        c.task = val;
      } else {
        dup(c.params.count(key) > 0);
        c.params[key] = val;
      }
    } else if (section == "output") {
      if (key == "path")
        c.output = val;
      else if (key == "seed")
        c.seed = static_cast<std::uint64_t>(to_int(val, "seed"));
      else
        throw ConfigError("unknown key in [output]: " + key);
    } else {
      dup(c.tolerance.count(key) > 0);
      c.tolerance[key] = val;
    }
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::validate() const {
  if (task.empty()) throw ConfigError("missing [task] name");
  const auto& allowed = task_keys(task);
  for (const auto& [k, v] : params)
    if (!contains(allowed, k)) throw ConfigError("unknown key for task " + task + ": " + k);
  for (const auto& [k, v] : law)
    if (!contains(k_law_keys, k)) throw ConfigError("unknown key in [law]: " + k);
  for (const auto& [k, v] : tolerance)
    if (!contains(k_tol_keys, k)) throw ConfigError("unknown key in [tolerance]: " + k);
  if (task != "reproduce" && law.empty()) throw ConfigError("missing [law] section");
  if (law.count("file") && law.size() > 1) throw ConfigError("[law] file excludes other keys");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  if (!law.empty()) {
    os << "[law]\n";
    for (const auto& [k, v] : law) os << k << " = " << v << "\n";
  }
  os << "[task]\nname = " << task << "\n";
  for (const auto& [k, v] : params) os << k << " = " << v << "\n";
  os << "[output]\n";
  if (!output.empty()) os << "path = " << output << "\n";
  os << "seed = " << seed << "\n";
  if (!tolerance.empty()) {
    os << "[tolerance]\n";
    for (const auto& [k, v] : tolerance) os << k << " = " << v << "\n";
  }
  return os.str();
}

std::string ExperimentConfig::param(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::shared_ptr<const StepLaw> law_from_config(const std::map<std::string, std::string>& law) {
  if (auto it = law.find("file"); it != law.end()) {
    std::ifstream f(it->second);
    if (!f) throw ConfigError("missing law file " + it->second);
    std::stringstream ss;
    ss << f.rdbuf();
    return std::make_shared<const StepLaw>(StepLaw::from_json(ss.str()));
  }
  auto it = law.find("family");
  if (it == law.end()) throw ConfigError("[law] needs family or file");
  BuiltinSpec s;
  s.family = family_from_name(it->second);
  if (auto a = law.find("alpha"); a != law.end()) s.alpha = to_real(a->second, "alpha");
  if (auto a = law.find("p"); a != law.end()) s.p = to_real(a->second, "p");
  if (auto a = law.find("n_max"); a != law.end()) s.n_max = static_cast<int>(to_int(a->second, "n_max"));
  if (auto a = law.find("tail_const"); a != law.end()) s.tail_const = to_real(a->second, "tail_const");
  if (auto a = law.find("cutoff"); a != law.end()) s.cutoff = to_int(a->second, "cutoff");
  return std::make_shared<const StepLaw>(make_builtin(s));
}

std::vector<std::int64_t> parse_int_grid(const std::string& s) {
  std::vector<std::int64_t> out;
  if (trim(s).empty()) return out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    std::string rest = s.substr(dots + 2);
    std::int64_t step = 1;
    if (auto c = rest.find(':'); c != std::string::npos) {
      step = to_int(trim(rest.substr(c + 1)), "grid step");
      rest = rest.substr(0, c);
    }
    const auto a = to_int(trim(s.substr(0, dots)), "grid start"), b = to_int(trim(rest), "grid end");
    if (step <= 0) throw ConfigError("grid step must be positive");
    for (auto x = a; x <= b; x += step) out.push_back(x);
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(to_int(trim(tok), "grid entry"));
  return out;
}

std::vector<double> parse_real_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!trim(tok).empty()) out.push_back(to_real(trim(tok), "grid entry"));
  return out;
}

}  // namespace htp
