#include <iostream>

#include "fdigame/experiment.hpp"

int main(int argc, char** argv) { return fdigame::run_cli(argc, argv, std::cout, std::cerr); }
