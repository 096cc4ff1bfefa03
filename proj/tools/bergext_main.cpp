#include "bergext/cli.hpp"

int main(int argc, char** argv) { return bergext::cli_main(argc, argv); }
