#include <iostream>

#include "vgit/cli.hpp"

int main(int argc, char** argv) { return vgit::run_cli(argc, argv, std::cout, std::cerr); }
