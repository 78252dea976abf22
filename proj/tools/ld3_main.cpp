#include "ld3/cli.hpp"

int main(int argc, char** argv) { return ld3::cli::run(argc, argv); }
