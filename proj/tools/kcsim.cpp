#include <iostream>

#include "kcsim/cli.hpp"

int main(int argc, char** argv) { return kcsim::run_cli(argc, argv, std::cout, std::cerr); }
