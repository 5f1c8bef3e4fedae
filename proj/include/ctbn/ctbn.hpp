#ifndef CTBN_CTBN_HPP_
#define CTBN_CTBN_HPP_

// Convenience umbrella: the whole toolkit in one include.

#include "ctbn/closure.hpp"
#include "ctbn/ctmc.hpp"
#include "ctbn/dynamics.hpp"
#include "ctbn/estimation.hpp"
#include "ctbn/experiments.hpp"
#include "ctbn/model.hpp"
#include "ctbn/model_io.hpp"
#include "ctbn/rate_matrix.hpp"
#include "ctbn/reduction.hpp"
#include "ctbn/rng.hpp"
#include "ctbn/sampler.hpp"
#include "ctbn/state_space.hpp"
#include "ctbn/trajectory.hpp"

#endif  // CTBN_CTBN_HPP_
