#pragma once

#include <iosfwd>

namespace resilest {

/// Entry point of the `resilest` tool. Exit codes: 0 success, 2 invalid
/// input, 3 mathematical precondition failed, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace resilest
