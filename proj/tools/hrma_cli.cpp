#include "hrma/studies.hpp"

int main(int argc, char** argv) { return hrma::cli_main(argc, argv); }
