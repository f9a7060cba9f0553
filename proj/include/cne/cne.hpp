#ifndef CNE_CNE_HPP
#define CNE_CNE_HPP

#include "data.hpp"
#include "encoder.hpp"
#include "kernel.hpp"
#include "loss.hpp"
#include "metrics.hpp"
#include "neighbor_graph.hpp"
#include "optimize.hpp"
#include "sampler.hpp"
#include "types.hpp"

#endif
