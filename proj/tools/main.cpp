#include <iostream>

#include "evkit/cli.hpp"

int main(int argc, char** argv) { return evkit::cli::run(argc, argv, std::cout, std::cerr); }
