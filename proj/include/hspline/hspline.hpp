#pragma once

#include "hspline/bspline.hpp"
#include "hspline/cache.hpp"
#include "hspline/duals.hpp"
#include "hspline/fourier.hpp"
#include "hspline/gramian.hpp"
#include "hspline/group.hpp"
#include "hspline/quadrature.hpp"
#include "hspline/specfun.hpp"
#include "hspline/splines.hpp"
