#pragma once

#include "analysis.hpp"
#include "bench.hpp"
#include "config.hpp"
#include "conv.hpp"
#include "gradients.hpp"
#include "io.hpp"
#include "modules.hpp"
#include "pooling.hpp"
#include "rng.hpp"
#include "tensor.hpp"
#include "verify.hpp"
