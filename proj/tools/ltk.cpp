#include "commands.hpp"

int main(int argc, char** argv) { return ltk::cli::run(std::vector<std::string>(argv, argv + argc)); }
