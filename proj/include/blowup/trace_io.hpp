#pragma once

#include <string>

#include "json.hpp"

#include "blowup/ivp.hpp"

namespace blowup {

/// Rows `eta,w,wp,V`, one per sample.
void write_trace_csv(const std::string& path, const SolutionTrace& trace);

nlohmann::json trace_metadata(const SolutionTrace& trace, const IntegratorOptions& opts);

}  // namespace blowup
