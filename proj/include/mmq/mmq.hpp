#pragma once

#include "errors.hpp"
#include "numerics.hpp"
#include "core_model.hpp"
#include "airy.hpp"
#include "kernels.hpp"
#include "layer_eval.hpp"
#include "region1.hpp"
#include "caustics.hpp"
#include "region2.hpp"
#include "layers.hpp"
#include "marginals.hpp"
#include "verify.hpp"
#include "fd_oracle.hpp"
#include "io.hpp"
