#include <iostream>

#include "waveguide/cli.hpp"

int main(int argc, char** argv) { return wg::run_cli(argc, argv, std::cout, std::cerr); }
