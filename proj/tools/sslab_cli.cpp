#include "sslab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sslab::cli::run(argc, argv, std::cout, std::cerr); }
