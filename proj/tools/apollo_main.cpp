#include <iostream>
#include <vector>

#include "apollo/driver.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return apollo::cli::run_cli(args, std::cout, std::cerr);
}
