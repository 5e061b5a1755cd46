#include <doctest.h>

#include "dep/pipeline.hpp"
