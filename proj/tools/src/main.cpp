#include <iostream>

#include "voc_cli/cli.hpp"

int main(int argc, char** argv) {
    return voc::cli::run(argc, argv, std::cout, std::cerr);
}
