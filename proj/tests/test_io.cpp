#include <doctest.h>
#include "scss/wav.hpp"
