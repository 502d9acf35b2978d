#pragma once

#include "paraclip/cell_json.hpp"
#include "paraclip/clipper.hpp"
#include "paraclip/conic.hpp"
#include "paraclip/core_math.hpp"
#include "paraclip/errors.hpp"
#include "paraclip/experiments.hpp"
#include "paraclip/frame.hpp"
#include "paraclip/jet.hpp"
#include "paraclip/levelset.hpp"
#include "paraclip/mesh.hpp"
#include "paraclip/surface_approx.hpp"
#include "paraclip/volume_fraction.hpp"
#include "paraclip/vtk_io.hpp"
