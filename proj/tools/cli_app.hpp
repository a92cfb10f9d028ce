#pragma once

#include <string>
#include <vector>

namespace blowup::cli {

/// Exit codes: 0 ok, 1 parameter/usage error, 2 failed diagnostic.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace blowup::cli
