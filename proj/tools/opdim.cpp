#include "opdim/cli.hpp"

int main(int argc, char** argv) { return opdim::cli::main(argc, argv); }
