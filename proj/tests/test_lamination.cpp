#include <catch2/catch_amalgamated.hpp>
#include "leaflyap/runner.hpp"
TEST_CASE("placeholder test_lamination") { SUCCEED(); }
