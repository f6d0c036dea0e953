#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stableid {

// Command-line driver. Subcommands: project, estimate, simulate, bench
// (spectral | rates | coverage). Exit codes: 0 success, 1 usage or
// configuration error, 2 numerical failure. Errors are reported on the
// error stream as one JSON object {"code": ..., "message": ...}.
int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

// argv wrapper around cli_run using std::cout / std::cerr.
int cli_main(int argc, const char* const* argv);

}  // namespace stableid
