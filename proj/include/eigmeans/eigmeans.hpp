#pragma once

#include "eigmeans/specialfun.hpp"
#include "eigmeans/quadrature.hpp"
#include "eigmeans/manifold.hpp"
#include "eigmeans/means.hpp"
#include "eigmeans/odecmp.hpp"
#include "eigmeans/perturb.hpp"
#include "eigmeans/experiment.hpp"
