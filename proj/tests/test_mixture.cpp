#include <doctest.h>
#include "scss/mixture.hpp"
