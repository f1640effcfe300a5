#include <iostream>

#include "kale/cli.hpp"

int main(int argc, char** argv) { return kale::cli::main_with_args(argc, argv, std::cout, std::cerr); }
