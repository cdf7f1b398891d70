#include "commands.hpp"

int main(int argc, char** argv) { return flowgate::cli::run(argc, argv); }
