#include "qsense/commands.hpp"

int main(int argc, char** argv) { return qsense::cli::run(argc, argv); }
