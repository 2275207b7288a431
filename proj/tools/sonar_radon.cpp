#include "cli.hpp"

int main(int argc, char** argv) { return sonar::cli::run(argc, argv); }
