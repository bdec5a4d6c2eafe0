#include <doctest.h>
#include "scss/bound.hpp"
