#include <iostream>

#include "gvspec/cli.hpp"

int main(int argc, char** argv) { return gvspec::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
