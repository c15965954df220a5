#include <iostream>

#include "k3char/cli.hpp"

int main(int argc, char** argv) { return k3char::run_cli(argc, argv, std::cout, std::cerr); }
