#include <iostream>

#include "qdn/experiment/commands.hpp"

int main(int argc, char** argv) { return qdn::run_cli(argc, argv, std::cout, std::cerr); }
