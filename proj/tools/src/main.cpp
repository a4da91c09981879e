#include "acdc/app/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return acdc::app::run_cli(argc, argv, std::cout, std::cerr); }
