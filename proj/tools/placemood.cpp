#include "placemood/cli.hpp"

int main(int argc, char** argv) { return placemood::cli::run(argc, argv); }
