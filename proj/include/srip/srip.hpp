#pragma once

#include "srip/error.hpp"
#include "srip/matrix.hpp"
#include "srip/linalg.hpp"
#include "srip/transforms.hpp"
#include "srip/random.hpp"
#include "srip/subspace.hpp"
#include "srip/ensembles.hpp"
#include "srip/rip.hpp"
#include "srip/experiments.hpp"
#include "srip/io.hpp"
