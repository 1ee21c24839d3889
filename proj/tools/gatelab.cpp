#include "gatelab/cli.hpp"

int main(int argc, char** argv) { return gatelab::cli::run_cli(argc, argv); }
