#include "bailab/cli.hpp"

int main(int argc, char** argv) { return bailab::cli_main(argc, argv); }
