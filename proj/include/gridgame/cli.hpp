#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridgame {

/// Entry point behind the gridgame executable. `args` excludes argv[0].
/// Returns 0 on success, 2 on usage errors and 1 on runtime errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridgame
