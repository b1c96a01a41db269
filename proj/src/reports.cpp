#include "htp/reports.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace htp {

std::string header_line(const std::string& law_hash, std::uint64_t seed) {
  std::string h = std::string("# ") + k_tool_version;
  if (!law_hash.empty()) h += " law=" + law_hash;
  return h + " seed=" + std::to_string(seed);
}

void write_artifact(const std::string& path, const std::string& header, const std::string& body) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  if (!header.empty()) f << header << '\n';
  f << body;
  if (!body.empty() && body.back() != '\n') f << '\n';
  if (!f) throw std::runtime_error("write failed for " + path);
}

ExitReport mc_report(const StepLaw& law, const McEstimate& est, std::optional<double> exact) {
  ExitReport r;
  r.law = law.name();
  r.query = est.spec;
  r.exact = exact;
  r.mc_estimate = est.estimate;
  r.mc_se = est.se;
  if (!est.valid())
    r.verdict = "invalid: overflow fraction " + std::to_string(est.overflow_fraction());
  else if (exact)
    r.verdict = std::abs(est.estimate - *exact) <= 4.0 * est.se ? "agrees within 4 SE" : "disagrees beyond 4 SE";
  else
    r.verdict = "estimate only";
  return r;
}

}  // namespace htp
