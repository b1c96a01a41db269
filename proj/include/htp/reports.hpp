#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "htp/green_exit.hpp"
#include "htp/mc_engine.hpp"
#include "htp/step_laws.hpp"

namespace htp {

inline constexpr const char* k_tool_version = "htp 1.0.0";

// "# htp 1.0.0 law=<hash> seed=<seed>"; law_hash may be empty for law-free outputs
std::string header_line(const std::string& law_hash, std::uint64_t seed);

// Writes header + body (header skipped when empty), creating parent directories. Byte-identical for identical inputs.
void write_artifact(const std::string& path, const std::string& header, const std::string& body);

// JSON in the exit-report schema for a simulated race, with an optional exact counterpart.
ExitReport mc_report(const StepLaw& law, const McEstimate& est, std::optional<double> exact = std::nullopt);

}  // namespace htp
