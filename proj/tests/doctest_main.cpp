// Single translation unit providing the doctest runner for all suites.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
