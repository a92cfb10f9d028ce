#include "cli_app.hpp"

int main(int argc, char** argv) { return blowup::cli::run(argc, argv); }
