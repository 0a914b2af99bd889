#include <iostream>

#include "hcb/cli.hpp"

int main(int argc, char** argv) { return hcb::cli::run(argc, argv, std::cout, std::cerr); }
