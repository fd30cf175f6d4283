#pragma once

#include "corrspec/cluster_filter.hpp"
#include "corrspec/density.hpp"
#include "corrspec/eigen_sym.hpp"
#include "corrspec/factor_model.hpp"
#include "corrspec/io.hpp"
#include "corrspec/linalg.hpp"
#include "corrspec/parallel.hpp"
#include "corrspec/poly_roots.hpp"
#include "corrspec/rmt.hpp"
#include "corrspec/rng.hpp"
#include "corrspec/stats.hpp"

namespace corrspec {
inline constexpr const char* version = "0.1.0";
}
