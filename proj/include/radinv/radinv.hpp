#pragma once

#include <radinv/types.hpp>
#include <radinv/rng.hpp>
#include <radinv/linalg.hpp>
#include <radinv/secular.hpp>
#include <radinv/model.hpp>
#include <radinv/invariance.hpp>
#include <radinv/mis.hpp>
#include <radinv/special.hpp>
#include <radinv/stats.hpp>
#include <radinv/scenario.hpp>
