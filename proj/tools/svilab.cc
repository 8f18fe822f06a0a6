#include "svilab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return svilab::cli::run_cli(argc, argv, std::cout, std::cerr); }
