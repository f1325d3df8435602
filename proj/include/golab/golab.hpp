#pragma once

#include "golab/scalar.hpp"
#include "golab/linalg.hpp"
#include "golab/lie_algebra.hpp"
#include "golab/decomp.hpp"
#include "golab/isotropy.hpp"
#include "golab/metric.hpp"
#include "golab/go.hpp"
#include "golab/stiefel.hpp"
#include "golab/report.hpp"
