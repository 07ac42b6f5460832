#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pros {

//! Runs the command-line interface on `args` (program name excluded).
//! Primary output goes to `out` unless --out-dir is given; errors are written
//! to `err` as a JSON object. Returns the process exit code: 0 success,
//! 2 usage error, 3 data error, 4 numerical error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pros
