#pragma once

#include "mirrorkit/bench.hpp"
#include "mirrorkit/data.hpp"
#include "mirrorkit/errors.hpp"
#include "mirrorkit/kernels.hpp"
#include "mirrorkit/losses.hpp"
#include "mirrorkit/optimizer.hpp"
