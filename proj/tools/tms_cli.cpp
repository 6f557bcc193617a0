#include <iostream>

#include "tms/cli.hpp"

int main(int argc, char** argv) { return tms::run_cli(argc, argv, std::cout, std::cerr); }
