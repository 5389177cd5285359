// Umbrella header.
#pragma once

#include "polarfloer/cli.hpp"
#include "polarfloer/complexes.hpp"
#include "polarfloer/dataset_io.hpp"
#include "polarfloer/equiv_floer.hpp"
#include "polarfloer/equivariant.hpp"
#include "polarfloer/matrix.hpp"
#include "polarfloer/morse_km.hpp"
#include "polarfloer/patterns.hpp"
#include "polarfloer/rings.hpp"
#include "polarfloer/snf.hpp"
#include "polarfloer/twisted.hpp"
