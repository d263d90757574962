#include <iostream>

#include "gpx/app.hpp"

int main(int argc, char** argv) { return gpx::run_cli(argc, argv, std::cout, std::cerr); }
