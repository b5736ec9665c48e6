#include "lcns/cli.hpp"

int main(int argc, char** argv) { return lcns::cli::main(argc, argv); }
