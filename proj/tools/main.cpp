#include "cli.hpp"

int main(int argc, char** argv) { return lbekf::cli::run_cli(argc, argv); }
