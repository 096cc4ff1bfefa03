#pragma once

namespace bergext {

/// Command-line entry point. Exit codes: 0 success, 1 parameter or usage
/// error, 2 numerical degeneracy or divergence.
int cli_main(int argc, char** argv);

}  // namespace bergext
