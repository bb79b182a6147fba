#include "jrsp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return jrsp::cli::run_cli(argc, argv, std::cout, std::cerr);
}
