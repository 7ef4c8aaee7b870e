#include <iostream>

#include "multicoap/cli.hpp"

int main(int argc, char** argv) { return multicoap::cli::run(argc, argv, std::cout, std::cerr); }
