#include "gpr/cli/cli.hpp"

int main(int argc, char** argv) { return gpr::run_cli(argc, argv); }
