#pragma once

#include <iosfwd>

namespace levystop {

/// Exit codes: 0 success, 1 input error, 2 assumption violation, 3 numerical quality failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace levystop
