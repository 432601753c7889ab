#include "recipemc/cli.h"

int main(int argc, char** argv) { return recipemc::cli::main_entry(argc, argv); }
