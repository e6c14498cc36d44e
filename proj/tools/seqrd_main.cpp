#include "seqrd/cli.hpp"

int main(int argc, char** argv) { return seqrd::cli::main(argc, argv); }
