#include "chorusnet/cli.hpp"

int main(int argc, char** argv) { return chorusnet::cli_main(argc, argv); }
