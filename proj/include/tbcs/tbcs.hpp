#pragma once

#include "tbcs/core.hpp"
#include "tbcs/fft.hpp"
#include "tbcs/grid.hpp"
#include "tbcs/image_update.hpp"
#include "tbcs/metrics.hpp"
#include "tbcs/phantom.hpp"
#include "tbcs/rng.hpp"
#include "tbcs/sensing.hpp"
#include "tbcs/solver.hpp"
#include "tbcs/sparse_coding.hpp"
#include "tbcs/transform.hpp"
