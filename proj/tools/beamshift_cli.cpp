#include <iostream>

#include "beamshift/cli.hpp"

int main(int argc, char** argv) { return beamshift::cli::run(argc, argv, std::cout, std::cerr); }
