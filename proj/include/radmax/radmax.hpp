#pragma once

#include "space.hpp"
#include "util.hpp"
#include "rademacher.hpp"
#include "dyadic.hpp"
#include "stepfn.hpp"
#include "shifted.hpp"
#include "maximal.hpp"
#include "decomp.hpp"
#include "weights.hpp"
#include "io.hpp"
#include "corpus.hpp"
#include "experiments.hpp"
