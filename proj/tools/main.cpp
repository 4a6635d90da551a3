#include "l2m/cli.hpp"

int main(int argc, char** argv) { return l2m::cli::main(argc, argv); }
