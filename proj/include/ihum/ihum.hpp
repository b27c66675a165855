#ifndef IHUM_IHUM_HPP
#define IHUM_IHUM_HPP

#include "ihum/cg.hpp"
#include "ihum/convexity.hpp"
#include "ihum/grid.hpp"
#include "ihum/hum.hpp"
#include "ihum/propagator.hpp"
#include "ihum/random.hpp"
#include "ihum/tridiagonal.hpp"

#endif  // IHUM_IHUM_HPP
