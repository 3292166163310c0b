#pragma once

// Command-line front end: subcommand dispatch, JSON manifest parsing, report
// emission, and the exit-code contract:
//   0 success, 2 parse error, 3 domain error, 4 origin crossing,
//   5 diverged, 6 not converged (outputs are still written).
namespace dhym::cli {

int run_main(int argc, char** argv);

}  // namespace dhym::cli
