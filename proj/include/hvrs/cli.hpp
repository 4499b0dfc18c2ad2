#pragma once

#include <iosfwd>

namespace hvrs {

// Full command-line entry point. Returns 0 on success, 1 on usage errors,
// 2 on runtime errors. out/err default to std::cout/std::cerr; tests inject
// string streams (and a scripted stdin for the interactive runner).
int cli_main(int argc, const char* const* argv);
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
             std::istream& in);

}  // namespace hvrs
