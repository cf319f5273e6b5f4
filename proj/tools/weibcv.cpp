#include <iostream>

#include "weibcv/cli.hpp"

int main(int argc, char** argv) { return weibcv::cli::run(argc, argv, std::cout, std::cerr); }
