#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace constructa::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitAmbiguous = 2 };

/// Runs one verb (analyze, localize, gramian, plotdata, simulate). Reports go
/// to `out` (or --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, used to fingerprint the scenario echoed in reports.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace constructa::cli
