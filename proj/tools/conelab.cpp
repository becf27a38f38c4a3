#include <iostream>

#include "conelab/cli.hpp"

int main(int argc, char** argv) { return conelab::cli::dispatch(argc, argv, std::cout, std::cerr); }
