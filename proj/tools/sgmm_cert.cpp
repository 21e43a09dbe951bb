#include "sgmm_cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return sgmm::cli::run(argc, argv, std::cout, std::cerr);
}
