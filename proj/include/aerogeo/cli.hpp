#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aerogeo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;

/// Runs one invocation. `args` excludes the program name. Diagnostics go to
/// `err`, progress notes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace aerogeo::cli
