#include <iostream>

#include "ghgrl/cli.hpp"

int main(int argc, char** argv) { return ghgrl::cli::run(argc, argv, std::cout, std::cerr); }
