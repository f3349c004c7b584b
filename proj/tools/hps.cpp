#include <iostream>

#include "hps/cli.hpp"

int main(int argc, char** argv) { return hps::run_cli(argc, argv, std::cout, std::cerr); }
