#include <iostream>

#include "mbkdv/cli.hpp"

int main(int argc, char** argv) { return mbkdv::cli::run(argc, argv, std::cout, std::cerr); }
