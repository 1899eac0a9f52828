#pragma once

#include "arith.hpp"
#include "enumerate.hpp"
#include "error.hpp"
#include "forge.hpp"
#include "glue.hpp"
#include "io.hpp"
#include "isom.hpp"
#include "lattice.hpp"
#include "matrix.hpp"
#include "padic.hpp"
#include "pipeline.hpp"
#include "poly.hpp"
