#include "hvrs/cli.hpp"

int main(int argc, char** argv) { return hvrs::cli_main(argc, argv); }
