#include <iostream>

#include "phasels/cli.hpp"

int main(int argc, char** argv) { return phasels::RunCli(argc, argv, std::cout, std::cerr); }
