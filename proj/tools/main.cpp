#include "cli.hpp"

int main(int argc, char** argv) { return mocpd::cli::run(argc, argv); }
