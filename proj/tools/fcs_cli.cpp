#include "fcs/cli.hpp"

int main(int argc, char** argv) { return fcs::cli::run(argc, argv); }
