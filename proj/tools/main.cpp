#include <iostream>

#include "fonbw/cli.hpp"

int main(int argc, char** argv) { return fonbw::run_cli(argc, argv, std::cerr); }
