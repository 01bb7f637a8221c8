#include "shotlearn/cli.hpp"

int main(int argc, char** argv) { return shotlearn::cli::run(argc, argv); }
