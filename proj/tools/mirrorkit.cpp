#include "mirrorkit/cli.hpp"

int main(int argc, char** argv) { return mirrorkit::cli::main(argc, argv); }
