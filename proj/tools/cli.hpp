// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sew::cli {

/// Entry point shared by the `sew` binary and the tests. `args` excludes the
/// program name. Returns the process exit code (0 on success).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sew::cli
