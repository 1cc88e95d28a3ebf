#ifndef DPERM_DPERM_HPP
#define DPERM_DPERM_HPP

#include "dperm/convex_body.hpp"
#include "dperm/datasets.hpp"
#include "dperm/erm.hpp"
#include "dperm/harness.hpp"
#include "dperm/mirror.hpp"
#include "dperm/optimizers.hpp"
#include "dperm/privacy.hpp"
#include "dperm/rng.hpp"

#endif  // DPERM_DPERM_HPP
