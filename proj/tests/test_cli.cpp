#include <catch2/catch_amalgamated.hpp>
// Populated with the cli module.
