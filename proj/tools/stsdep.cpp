#include <iostream>

#include "stsdep/cli.hpp"

int main(int argc, char** argv) { return stsdep::cli::run_cli(argc, argv, std::cout, std::cerr); }
