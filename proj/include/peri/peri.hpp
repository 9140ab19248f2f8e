#pragma once

#include "peri/core.hpp"
#include "peri/diagnostics.hpp"
#include "peri/fft.hpp"
#include "peri/grid.hpp"
#include "peri/kernel.hpp"
#include "peri/model.hpp"
#include "peri/rhs.hpp"
#include "peri/solver.hpp"
