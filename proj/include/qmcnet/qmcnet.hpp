#pragma once

#include "qmcnet/digital_net.hpp"
#include "qmcnet/genz.hpp"
#include "qmcnet/gf2.hpp"
#include "qmcnet/quality.hpp"
#include "qmcnet/reduce.hpp"
#include "qmcnet/rng.hpp"
#include "qmcnet/search.hpp"
#include "qmcnet/sobol.hpp"
