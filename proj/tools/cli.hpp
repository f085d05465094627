#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ogl::cli {

enum ExitCode : int { kConverged = 0, kFailure = 1, kUsage = 2 };

/// Runs `ogl <subcommand> ...`; args excludes the program name.
///
///   solve    solve a loaded or generated problem, print the report JSON
///   certify  solve accurately and print the per-group certificate CSV
///   gen      write a generated instance as LIBSVM data plus a group file
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ogl::cli
