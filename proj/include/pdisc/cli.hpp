#pragma once

// The command-line surface: everything the binary does except main(). run_cli
// parses argv (plus an optional JSON config file; explicit flags win),
// dispatches to one of {gen, solve, analyze, capacity, schedule, ogp, sweep},
// writes the artifacts, and maps failures to exit codes:
//     0  success
//     2  user/data errors — bad flags, malformed config, infeasible LP,
//        schedule preconditions; one line on err, prefixed "EPDISC:"
//     1  internal errors (solver breakdown, logic faults), same prefix with
//        an "internal:" tag
//
// The streams are injected so tests can drive the dispatcher in-process; the
// binary passes std::cout / std::cerr.

#include <iosfwd>
#include <string>
#include <vector>

namespace pdisc {

inline constexpr const char* kPdiscVersion = "0.1.0";

// args = argv[1..]; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace pdisc
