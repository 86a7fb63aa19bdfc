#include <iostream>
#include <string>
#include <vector>

#include "aicp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return aicp::run_cli(args, std::cout, std::cerr);
}
