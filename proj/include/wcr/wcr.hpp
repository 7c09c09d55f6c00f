#pragma once

#include "wcr/numerics/error.hpp"
#include "wcr/numerics/finite_diff.hpp"
#include "wcr/numerics/monte_carlo.hpp"
#include "wcr/numerics/quadrature.hpp"
#include "wcr/numerics/special.hpp"
#include "wcr/numerics/sym_matrix.hpp"

#include "wcr/families.hpp"
#include "wcr/wscore.hpp"
#include "wcr/estimators.hpp"
#include "wcr/winfo.hpp"
#include "wcr/efficiency.hpp"
#include "wcr/experiments.hpp"
