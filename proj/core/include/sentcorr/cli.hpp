#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sentcorr::cli {

/// Entry point shared by the binary and the tests. argv-style arguments
/// without the program name; returns the process exit status.
/// Subcommands: vocab | train | eval | predict | correlate | gradcheck | report.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace sentcorr::cli
