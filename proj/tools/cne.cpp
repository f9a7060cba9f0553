#include "cne/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return cne::cli::run(argc, argv, std::cout, std::cerr);
}
