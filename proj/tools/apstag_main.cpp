#include <iostream>

#include "apstag/cli.hpp"

int main(int argc, char** argv) { return apstag::run_cli(argc, argv, std::cout, std::cerr); }
