#include "commands.hpp"

int main(int argc, char** argv) { return dhym::cli::run_main(argc, argv); }
