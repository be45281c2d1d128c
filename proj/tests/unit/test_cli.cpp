#include <doctest.h>

TEST_SUITE("cli") {

TEST_CASE("placeholder") { CHECK(true); }

}  // TEST_SUITE
