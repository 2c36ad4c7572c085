#pragma once

#include "motive/errors.hpp"
#include "motive/rational.hpp"
#include "motive/poly.hpp"
#include "motive/ratfunc.hpp"
#include "motive/bivariate.hpp"
#include "motive/mpoly.hpp"
#include "motive/residue_class.hpp"
#include "motive/motivic.hpp"
#include "motive/cells.hpp"
#include "motive/defset.hpp"
#include "motive/decompose.hpp"
#include "motive/presburger.hpp"
#include "motive/integrate.hpp"
#include "motive/oracle.hpp"
#include "motive/poincare.hpp"
