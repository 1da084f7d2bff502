#pragma once

#include "flb/bands.hpp"
#include "flb/borg.hpp"
#include "flb/chebyshev.hpp"
#include "flb/error.hpp"
#include "flb/floquet.hpp"
#include "flb/linalg.hpp"
#include "flb/monodromy.hpp"
#include "flb/operator.hpp"
#include "flb/polynomial.hpp"
