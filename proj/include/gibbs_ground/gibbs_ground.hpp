#pragma once

#include "gibbs_ground/classical.hpp"
#include "gibbs_ground/errors.hpp"
#include "gibbs_ground/lattice.hpp"
#include "gibbs_ground/model.hpp"
#include "gibbs_ground/operators.hpp"
#include "gibbs_ground/spectral.hpp"
#include "gibbs_ground/verification.hpp"
