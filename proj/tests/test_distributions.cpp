#include <doctest.h>
#include "scss/distributions.hpp"
