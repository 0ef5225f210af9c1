#pragma once

#include "swipt/bench.hpp"
#include "swipt/channel.hpp"
#include "swipt/common.hpp"
#include "swipt/harvest.hpp"
#include "swipt/highsnr.hpp"
#include "swipt/kkt.hpp"
#include "swipt/regimes.hpp"
#include "swipt/solver.hpp"
#include "swipt/sweep.hpp"
#include "swipt/waterfill.hpp"
