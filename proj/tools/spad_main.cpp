#include "spad/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return spad::cli::run(argc, argv, std::cout, std::cerr); }
