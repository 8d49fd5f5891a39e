#include <iostream>

#include "qrad/commands.hpp"

int main(int argc, char** argv) { return qrad::cli::run_cli(argc, argv, std::cout, std::cerr); }
