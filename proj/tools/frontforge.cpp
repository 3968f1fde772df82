#include "frontforge/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return frontforge::cli::run(argc, argv, std::cout, std::cerr); }
