#ifndef UNCON_UNCON_HPP
#define UNCON_UNCON_HPP

#include "uncon/baselines.hpp"
#include "uncon/curves.hpp"
#include "uncon/errors.hpp"
#include "uncon/experiment.hpp"
#include "uncon/gp.hpp"
#include "uncon/kernel.hpp"
#include "uncon/likelihood.hpp"
#include "uncon/metrics.hpp"
#include "uncon/rng.hpp"
#include "uncon/svg.hpp"
#include "uncon/unconstrainer.hpp"

#endif  // UNCON_UNCON_HPP
