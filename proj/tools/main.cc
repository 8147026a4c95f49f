#include <iostream>

#include "cli.h"

int main(int argc, char** argv) { return rs2gs::RunCli(argc, argv, std::cout, std::cerr); }
