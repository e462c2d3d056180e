#include "mrgarch/cli.hpp"

int main(int argc, char** argv) { return mrg::cli::run(argc, argv); }
