#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dune::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 2;

// Runs the `dune` command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace dune::cli
