#pragma once

#include "mirrorkit/mirror_descent.hpp"
#include "mirrorkit/trainer.hpp"
