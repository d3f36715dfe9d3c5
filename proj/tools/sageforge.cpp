// sageforge command-line interface. Subcommands are wired up in cli.hpp so
// they stay testable; this file only owns main().

#include "sageforge/cli.hpp"

int main(int argc, char** argv) { return sageforge::cli_main(argc, argv); }
