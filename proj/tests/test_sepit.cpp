#include <doctest.h>
#include "scss/sepit.hpp"
