#include "apmec/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return apmec::cli::run(argc, argv, std::cout, std::cerr);
}
