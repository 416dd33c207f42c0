// Acceptance battery: runs every library-level criterion and prints one
// pass/fail line per criterion. Exit code 0 when all pass, 3 otherwise.
#include <iostream>

#include "lpldp/selftest.hpp"

int main() { return lpldp::selftest::run_all("", 0, false, std::cout); }
