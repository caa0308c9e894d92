#include <iostream>
#include <string>
#include <vector>

#include "d2d/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return d2d::cli::run(args, std::cout, std::cerr);
}
