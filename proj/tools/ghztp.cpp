#include <iostream>

#include "ghztp/cli.hpp"

int main(int argc, char** argv) { return ghztp::cli::main(argc, argv, std::cout, std::cerr); }
