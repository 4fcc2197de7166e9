#include "tudiff/cli.hpp"

int main(int argc, char** argv) { return tudiff::cli::run(argc, argv); }
