#include <collide/cli.hpp>

#include <iostream>

int main(int argc, char** argv) {
    return collide::cli::run(argc, argv, std::cout, std::cerr);
}
