#include "parabest/cli.hpp"

int main(int argc, char **argv) { return parabest::cli_main(argc, argv); }
