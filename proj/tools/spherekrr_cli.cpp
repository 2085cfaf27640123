#include "spherekrr/harness.hpp"

int main(int argc, char** argv) { return spherekrr::cli_main(argc, argv); }
