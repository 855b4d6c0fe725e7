#pragma once

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/embedding.hpp"
#include "rootbarrier/errors.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/parallel.hpp"
#include "rootbarrier/rng.hpp"
#include "rootbarrier/special_functions.hpp"
#include "rootbarrier/verification.hpp"
#include "rootbarrier/version.hpp"
#include "rootbarrier/walk_on_roots.hpp"
